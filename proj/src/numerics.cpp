#include "fgap/numerics.hpp"

#include <boost/math/tools/toms748_solve.hpp>
#include <cstdint>
#include <fmt/format.h>

namespace fgap {

double bracketed_root(const std::function<double(double)>& f, double lo, double hi, RootOptions o) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw NumericalError(fmt::format("no sign change on [{}, {}]", lo, hi));
    auto done = [&](double a, double b) {
        double scale = std::max(std::abs(a), std::abs(b));
        return std::abs(b - a) <= std::max(o.tol, 4.0 * std::numeric_limits<double>::epsilon() * scale);
    };
    std::uintmax_t iters = static_cast<std::uintmax_t>(o.max_iter);
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, done, iters);
    if (iters >= static_cast<std::uintmax_t>(o.max_iter))
        throw NumericalError(fmt::format("root bracketing stalled on [{}, {}]", lo, hi));
    double a = r.first, b = r.second;
    double fa = f(a), fb = f(b);
    return std::abs(fa) <= std::abs(fb) ? a : b;
}

double poly_eval(std::span<const double> c, double x) {
    double s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
    return s;
}

cplx poly_eval(std::span<const double> c, cplx x) {
    cplx s = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) s = s * x + c[i];
    return s;
}

std::vector<double> poly_quotient_at(std::span<const double> c, double x0) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> q(c.size() - 1);
    double acc = 0.0;
    for (std::size_t i = c.size() - 1; i >= 1; --i) {
        acc = acc * x0 + c[i];
        q[i - 1] = acc;
    }
    return q;
}

std::vector<double> poly_mul(std::span<const double> p, std::span<const double> q) {
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

std::vector<double> poly_from_roots(std::span<const double> roots) {
    std::vector<double> p{1.0};
    for (double r : roots) {
        std::vector<double> f{-r, 1.0};
        p = poly_mul(p, f);
    }
    return p;
}

std::pair<std::vector<double>, std::vector<double>> poly_divmod(std::span<const double> p,
                                                                std::span<const double> d) {
    std::vector<double> r(p.begin(), p.end());
    if (d.size() > p.size()) return {{0.0}, r};
    std::vector<double> q(p.size() - d.size() + 1, 0.0);
    for (std::size_t k = q.size(); k-- > 0;) {
        double c = r[k + d.size() - 1] / d.back();
        q[k] = c;
        for (std::size_t j = 0; j < d.size(); ++j) r[k + j] -= c * d[j];
    }
    r.resize(d.size() > 1 ? d.size() - 1 : 1);
    return {q, r};
}

} // namespace fgap
