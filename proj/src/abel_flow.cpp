#include "fgap/abel_flow.hpp"

#include "fgap/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fmt/format.h>

namespace fgap {

namespace {
constexpr double PI = std::numbers::pi;

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> wrapped_difference(std::span<const double> a, std::span<const double> b) {
    std::vector<double> r(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) r[k] = wrap_signed(a[k] - b[k]);
    return r;
}
} // namespace

DivisorPoint chart_point(const Gap& g, double phi) {
    double th = std::fmod(phi, 2.0 * PI);
    if (th < 0.0) th += 2.0 * PI;
    if (th == 0.0) return {g.a, 1};
    if (th == PI) return {g.b, 1};
    if (th < PI) return {detail::angle_point(g.a, g.b, th).x, 1};
    return {detail::angle_point(g.a, g.b, 2.0 * PI - th).x, -1};
}

AbelMap AbelMap::build(const BandSet& e, QuadOptions o) { return build(ThetaK::build(e, 0, o), o); }

AbelMap AbelMap::build(const ThetaK& theta0, QuadOptions o) {
    if (theta0.order() != 0) throw ValidationError("the Abel map is normalized by the order-0 integral");
    AbelMap m;
    m.e_ = theta0.bands();
    m.opt_ = o;
    auto c = theta0.critical_points();
    m.c_.assign(c.begin(), c.end());
    m.dc_ = fgap::critical_divisor(m.e_, m.c_);
    const std::size_t n = m.e_.size();
    m.half_base_.assign(n, 0.0);
    std::vector<double> full(n, 0.0);
    for (double cj : m.c_) {
        auto gp = GreenPole::measures_only(m.e_, cj, o);
        for (std::size_t k = 0; k < n; ++k) {
            full[k] += gp.harmonic_measure(k + 1);
            m.half_base_[k] += 0.5 * gp.harmonic_measure(k + 1);
        }
    }
    m.widom_ = CharacterVector(full);
    return m;
}

CharacterVector AbelMap::raw(const Divisor& d) const {
    const std::size_t n = e_.size();
    if (d.size() != n) throw ValidationError("divisor does not match the band set");
    std::vector<double> a(n, 0.0);
    for (const auto& p : d) {
        auto gp = GreenPole::measures_only(e_, p.lambda, opt_);
        for (std::size_t k = 0; k < n; ++k) a[k] += 0.5 * p.eps * gp.harmonic_measure(k + 1);
    }
    return CharacterVector(a);
}

CharacterVector AbelMap::operator()(const Divisor& d) const {
    return raw(d) + CharacterVector(half_base_);
}

std::vector<double> AbelMap::point_term(std::size_t j, double phi) const {
    DivisorPoint p = chart_point(e_.gap(j), phi);
    auto gp = GreenPole::measures_only(e_, p.lambda, opt_);
    std::vector<double> t(e_.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = 0.5 * p.eps * gp.harmonic_measure(k + 1);
    return t;
}

std::vector<double> AbelMap::shifted_unreduced(std::span<const double> phi) const {
    std::vector<double> f = half_base_;
    for (std::size_t j = 0; j < phi.size(); ++j) {
        auto t = point_term(j, phi[j]);
        for (std::size_t k = 0; k < f.size(); ++k) f[k] += t[k];
    }
    return f;
}

Divisor AbelMap::invert(const CharacterVector& target, const Divisor& seed, InversionOptions o,
                        InversionReport* report) const {
    const std::size_t n = e_.size();
    if (target.size() != n) throw ValidationError("target character does not match the band set");
    if (seed.size() != n) throw ValidationError("seed divisor does not match the band set");
    InversionReport rep;
    auto to_divisor = [&](std::span<const double> phi) {
        std::vector<DivisorPoint> pts;
        for (std::size_t j = 0; j < n; ++j) pts.push_back(chart_point(e_.gap(j), phi[j]));
        return make_divisor(e_, std::span<const DivisorPoint>(pts));
    };
    if (n == 0) {
        if (report) *report = rep;
        return to_divisor({});
    }

    const auto nn = static_cast<Eigen::Index>(n);
    auto jacobian = [&](std::span<const double> phi) {
        Eigen::MatrixXd jm(nn, nn);
        for (std::size_t j = 0; j < n; ++j) {
            auto up = point_term(j, phi[j] + o.fd_step);
            auto dn = point_term(j, phi[j] - o.fd_step);
            auto d = wrapped_difference(up, dn);
            for (std::size_t k = 0; k < n; ++k)
                jm(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = d[k] / (2.0 * o.fd_step);
        }
        return jm;
    };
    auto residual = [&](std::span<const double> phi, std::span<const double> goal) {
        return wrapped_difference(shifted_unreduced(phi), goal);
    };

    // Damped Newton on the chart; false when the residual stops decreasing.
    auto correct = [&](std::vector<double>& phi, std::span<const double> goal, double tol, Eigen::MatrixXd& jm) {
        auto r = residual(phi, goal);
        double rn = max_abs(r);
        for (int it = 0; it < o.max_newton; ++it) {
            if (rn < tol) return true;
            ++rep.newton_iterations;
            jm = jacobian(phi);
            Eigen::FullPivLU<Eigen::MatrixXd> lu(jm);
            if (!lu.isInvertible()) return false;
            Eigen::VectorXd rv = Eigen::Map<Eigen::VectorXd>(r.data(), nn);
            Eigen::VectorXd step = lu.solve(-rv);
            double big = step.cwiseAbs().maxCoeff();
            if (big > 0.5) step *= 0.5 / big;
            bool accepted = false;
            for (double damp = 1.0; damp > 1e-3; damp *= 0.5) {
                std::vector<double> trial = phi;
                for (std::size_t j = 0; j < n; ++j) trial[j] += damp * step(static_cast<Eigen::Index>(j));
                auto rt = residual(trial, goal);
                double rtn = max_abs(rt);
                if (rtn < rn) {
                    phi = std::move(trial);
                    r = std::move(rt);
                    rn = rtn;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return rn < tol;
        }
        return rn < tol;
    };

    std::vector<double> phi = divisor_chart(e_, seed).phi;
    const std::vector<double> start = shifted_unreduced(phi);
    std::vector<double> delta(n);
    for (std::size_t k = 0; k < n; ++k) delta[k] = wrap_signed(target[k] - start[k]);

    Eigen::MatrixXd jm = jacobian(phi);
    double s = 0.0;
    double ds = 1.0;
    double last_residual = 0.0;
    while (s < 1.0) {
        double s1 = std::min(1.0, s + ds);
        std::vector<double> goal(n);
        for (std::size_t k = 0; k < n; ++k) goal[k] = start[k] + s1 * delta[k];
        std::vector<double> trial = phi;
        // Tangent predictor from the last Jacobian.
        Eigen::FullPivLU<Eigen::MatrixXd> lu(jm);
        if (lu.isInvertible()) {
            Eigen::VectorXd dv(nn);
            for (std::size_t k = 0; k < n; ++k) dv(static_cast<Eigen::Index>(k)) = (s1 - s) * delta[k];
            Eigen::VectorXd pred = lu.solve(dv);
            double big = pred.cwiseAbs().maxCoeff();
            if (big < 1.0)
                for (std::size_t j = 0; j < n; ++j) trial[j] += pred(static_cast<Eigen::Index>(j));
        }
        const double tol = s1 == 1.0 ? o.tol : std::max(o.tol, 1e-8);
        Eigen::MatrixXd jt = jm;
        if (correct(trial, goal, tol, jt)) {
            phi = std::move(trial);
            jm = std::move(jt);
            s = s1;
            ds = std::min(1.0, 2.0 * ds);
            ++rep.steps;
        } else {
            last_residual = max_abs(residual(trial, goal));
            ds *= 0.5;
            if (ds < o.min_step)
                throw InversionError(fmt::format("Jacobi inversion stalled at path parameter {}", s), last_residual);
        }
    }
    std::vector<double> goal(n);
    for (std::size_t k = 0; k < n; ++k) goal[k] = target[k];
    rep.residual = max_abs(residual(phi, goal));
    for (auto& p : phi) {
        p = std::fmod(p, 2.0 * PI);
        if (p < 0.0) p += 2.0 * PI;
    }
    if (report) *report = rep;
    return to_divisor(phi);
}

FlowState make_flow(const AbelMap& abel, const ThetaK& theta0, const ThetaK& theta_k, const Divisor& d0) {
    if (theta0.order() != 0) throw ValidationError("the x-flow uses the order-0 frequencies");
    FlowState f;
    f.alpha0 = abel(d0);
    f.eta.assign(theta0.frequencies().begin(), theta0.frequencies().end());
    f.eta_k.assign(theta_k.frequencies().begin(), theta_k.frequencies().end());
    f.k = theta_k.order();
    f.seed = d0;
    return f;
}

CharacterVector flow_character(const FlowState& f, double x, double t) {
    std::vector<double> a(f.alpha0.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = f.alpha0[j] - f.eta[j] * x - f.eta_k[j] * t;
    return CharacterVector(a);
}

} // namespace fgap
