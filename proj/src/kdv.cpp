#include "fgap/kdv.hpp"

#include "fgap/errors.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <fmt/format.h>

namespace fgap {

namespace {
constexpr cplx I{0.0, 1.0};

double vmax(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

// Central differences of a vector-valued quantity along a flow at h, h/2, h/4, plus the
// Richardson value from the two finest steps.
template <class Values, class Residual>
FlowCheck run_flow_check(Values&& values, Residual&& residual, double h0) {
    FlowCheck out;
    std::vector<std::vector<cplx>> d;
    for (int l = 0; l < 3; ++l) {
        const double h = h0 / std::pow(2.0, l);
        auto up = values(h);
        auto dn = values(-h);
        std::vector<cplx> dv(up.size());
        for (std::size_t i = 0; i < up.size(); ++i) dv[i] = (up[i] - dn[i]) / (2.0 * h);
        out.h.push_back(h);
        out.residual.push_back(residual(dv));
        d.push_back(std::move(dv));
    }
    out.order = empirical_orders(out.residual);
    std::vector<cplx> rich(d[2].size());
    for (std::size_t i = 0; i < rich.size(); ++i) rich[i] = (4.0 * d[2][i] - d[1][i]) / 3.0;
    out.extrapolated = residual(rich);
    return out;
}

double potential_of(const BandSet& e, const Divisor& d) {
    double v = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) v += e.gap(j).a + e.gap(j).b - 2.0 * d[j].lambda;
    return v;
}

cplx sqrt_lambda(cplx lam) {
    if (lam.imag() == 0.0 && lam.real() < 0.0) return I * std::sqrt(-lam.real());
    return std::sqrt(lam);
}
} // namespace

double FlowCheck::max_residual() const { return vmax(residual); }

std::vector<double> empirical_orders(std::span<const double> residual) {
    std::vector<double> p;
    for (std::size_t i = 0; i + 1 < residual.size(); ++i) {
        if (residual[i] == 0.0 || residual[i + 1] == 0.0)
            p.push_back(0.0);
        else
            p.push_back(std::log2(residual[i] / residual[i + 1]));
    }
    return p;
}

// ---------------------------------------------------------------- chi coefficients

std::vector<double> gap_moments(const BandSet& e, const Divisor& d, int mmax) {
    if (d.size() != e.size()) throw ValidationError("divisor does not match the band set");
    if (mmax < 0) throw ValidationError("moment order must be non-negative");
    std::vector<double> tau(static_cast<std::size_t>(mmax) + 1, 0.0);
    for (std::size_t j = 0; j < d.size(); ++j) {
        const double a = e.gap(j).a, b = e.gap(j).b, l = d[j].lambda;
        for (int m = 0; m <= mmax; ++m) {
            const double p = m + 1.0;
            // -1/2 on (a, lambda), +1/2 on (lambda, b).
            const double lower = (std::pow(l, p) - std::pow(a, p)) / p;
            const double upper = (std::pow(b, p) - std::pow(l, p)) / p;
            tau[static_cast<std::size_t>(m)] += 0.5 * (upper - lower);
        }
    }
    return tau;
}

ChiCoefficients chi_closed_form(const BandSet& e, const Divisor& d, int k) {
    if (k < 0) throw ValidationError("hierarchy order must be non-negative");
    ChiCoefficients c;
    c.order = 2 * k;
    c.tau = gap_moments(e, d, k);
    c.chi.assign(static_cast<std::size_t>(2 * k) + 1, cplx{});
    c.source.assign(c.chi.size(), ChiSource::ClosedForm);

    // exp(-sum tau_m z^(m+1)) = 1 + chi_1 z + chi_3 z^2 + ..., z = 1/lambda.
    TruncatedSeries<double> arg(static_cast<std::size_t>(k));
    for (int m = 0; m < k; ++m) arg[static_cast<std::size_t>(m) + 1] = -c.tau[static_cast<std::size_t>(m)];
    auto ex = series_exp(arg);
    for (int m = 1; m <= k; ++m) c.chi[static_cast<std::size_t>(2 * m - 1)] = ex[static_cast<std::size_t>(m)];

    auto sg = sigma_weights(e, d);
    for (int m = 0; m <= k; ++m) {
        double s = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const double eps = ChiConvention::even_terms_carry_eps ? d[j].eps : 1.0;
            s += sg[j] * eps * std::pow(d[j].lambda, m);
        }
        c.chi[static_cast<std::size_t>(2 * m)] = 0.5 * I * s;
    }
    return c;
}

namespace {
using Wide = boost::multiprecision::cpp_bin_float_50;

// (m_+(mu^2) - m_+(0)) / (i mu) at mu = i y from the partial-fraction form, in extended precision.
Wide normalized_m(const BandSet& e, const Divisor& d, const Wide& y) {
    const std::size_t n = d.size();
    const Wide lam = -y * y;
    Wide r = 1 / (2 * y);
    for (std::size_t j = 0; j < n; ++j)
        r *= (d[j].lambda - lam) / sqrt((e.gap(j).a - lam) * (e.gap(j).b - lam));
    Wide m = -1 / (2 * r);
    for (std::size_t k = 0; k < n; ++k) {
        const Gap& g = e.gap(k);
        const Wide l = d[k].lambda;
        if (is_endpoint(g, d[k].lambda)) continue;
        Wide s = 2 * sqrt((l - g.a) * (g.b - l)) / sqrt(l);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == k) continue;
            s *= sqrt((1 - e.gap(j).a / l) * (1 - e.gap(j).b / l)) / abs(1 - d[j].lambda / l);
        }
        m += lam * s * d[k].eps / (2 * (l - lam));
    }
    return -m / y;
}
} // namespace

ChiOracle chi_asymptotic_oracle(const BandSet& e, const Divisor& d, int n) {
    if (n < 0) throw ValidationError("oracle order must be non-negative");
    if (d.size() != e.size()) throw ValidationError("divisor does not match the band set");
    ChiOracle out;
    const double top = e.empty() ? 1.0 : std::max(1.0, e.gap(e.size() - 1).b);
    // Powers of two keep h = 1/y exact.
    const double y0 = std::exp2(std::ceil(std::log2(4.0 * std::sqrt(top))));
    const std::size_t samples = static_cast<std::size_t>(std::max(12, 2 * n + 8));

    // F = 1 + sum c_j h^(j+1) with c_j = chi_j (-i)^(j+1) real.
    std::vector<Wide> h(samples), F(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        const Wide y = Wide(y0) * pow(Wide(2), static_cast<int>(s));
        h[s] = 1 / y;
        F[s] = normalized_m(e, d, y);
    }
    std::vector<Wide> c;
    const cplx ipow[4] = {1.0, I, -1.0, -I};
    for (int k = 0; k <= n; ++k) {
        std::vector<Wide> t(samples);
        for (std::size_t s = 0; s < samples; ++s) {
            Wide rest = F[s] - 1;
            for (int j = 0; j < k; ++j) rest -= c[static_cast<std::size_t>(j)] * pow(h[s], j + 1);
            t[s] = rest / pow(h[s], k + 1);
        }
        // Neville extrapolation to h = 0.
        Wide prev = t.back();
        for (std::size_t m = 1; m < samples; ++m) {
            for (std::size_t i = samples - 1; i >= m; --i) t[i] = t[i] + (t[i] - t[i - 1]) * h[i] / (h[i - m] - h[i]);
            if (m == samples - 2) prev = t.back();
        }
        c.push_back(t.back());
        const double err = static_cast<double>(abs(t.back() - prev));
        out.chi.push_back(static_cast<double>(t.back()) * ipow[(k + 1) % 4]);
        out.error.push_back(err);
        if (k > 2 * static_cast<int>(e.size()) + 2 && err > 1e-6 * std::max(1.0, std::abs(out.chi.back())))
            out.truncation_warning = true;
    }
    return out;
}

// ---------------------------------------------------------------- A and B

cplx KdVCoefficients::a_poly(cplx lam) const {
    cplx s = 0.0;
    for (const auto& a : A) s = s * lam + a;
    return s;
}

cplx KdVCoefficients::b_poly(cplx lam) const {
    cplx s = 0.0;
    for (const auto& b : B) s = s * lam + b;
    return s;
}

KdVCoefficients ab_coefficients(const ChiCoefficients& chi, int k) {
    if (k < 0 || 2 * k > chi.order) throw ValidationError(fmt::format("need chi through order {}", 2 * k));
    const auto n = static_cast<Eigen::Index>(k + 1);
    KdVCoefficients c;
    c.k = k;
    c.chi_o = Eigen::MatrixXcd::Zero(n, n);
    c.chi_e = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c.chi_o(i, i) = 1.0;
        for (Eigen::Index j = 0; j <= i; ++j) {
            if (i > j) c.chi_o(i, j) = chi.chi[static_cast<std::size_t>(2 * (i - j) - 1)];
            c.chi_e(i, j) = chi.chi[static_cast<std::size_t>(2 * (i - j))];
        }
    }
    c.A.assign(static_cast<std::size_t>(n), cplx{});
    for (Eigen::Index i = 0; i < n; ++i) {
        cplx s = i == 0 ? cplx(1.0) : cplx(0.0);
        for (Eigen::Index j = 0; j < i; ++j) s -= c.chi_o(i, j) * c.A[static_cast<std::size_t>(j)];
        c.A[static_cast<std::size_t>(i)] = s;
    }
    c.B.assign(static_cast<std::size_t>(n), cplx{});
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            c.B[static_cast<std::size_t>(i)] += c.chi_e(i, j) * c.A[static_cast<std::size_t>(j)];
    return c;
}

// ---------------------------------------------------------------- flow checks

FlowCheck b_from_a_identity_check(const SpectralContext& ctx, const FlowState& f, int k, double h) {
    const auto& abel = ctx.abel;
    auto coeffs = [&](double x) {
        Divisor d = x == 0.0 ? f.seed : abel.invert(flow_character(f, x, 0.0), f.seed);
        return ab_coefficients(chi_closed_form(ctx.bands, d, k), k);
    };
    const auto c0 = coeffs(0.0);
    const cplx chi0 = c0.chi_e(0, 0);
    auto values = [&](double x) { return coeffs(x).A; };
    // d_eta = -d/dx.
    auto residual = [&](const std::vector<cplx>& dA) {
        double r = 0.0;
        for (std::size_t n = 0; n < dA.size(); ++n)
            r = std::max(r, std::abs(c0.B[n] - (0.5 * I * (-dA[n]) + chi0 * c0.A[n])));
        return r;
    };
    return run_flow_check(values, residual, h);
}

ChiOneAgreement chi1_three_way(const SpectralContext& ctx, const FlowState& f, double h) {
    const auto& e = ctx.bands;
    auto chi0 = [&](double x) {
        Divisor d = x == 0.0 ? f.seed : ctx.abel.invert(flow_character(f, x, 0.0), f.seed);
        return I * m_plus_at_zero(e, d);
    };
    const cplx c0 = chi0(0.0);
    const cplx deta = -richardson_derivative(chi0, h);
    ChiOneAgreement a{};
    a.from_derivative = (0.5 * (c0 * c0 - I * deta)).real();
    a.from_moments = chi_closed_form(e, f.seed, 1).chi[1].real();
    a.from_trace = -0.5 * potential_of(e, f.seed);
    const double v[3] = {a.from_derivative, a.from_moments, a.from_trace};
    const double scale = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2]), 1e-300});
    a.max_relative = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) a.max_relative = std::max(a.max_relative, std::abs(v[i] - v[j]) / scale);
    return a;
}

FlowCheck riccati_check(const SpectralContext& ctx, const FlowState& f, double lam, double h) {
    const auto& e = ctx.bands;
    auto values = [&](double x) {
        Divisor d = x == 0.0 ? f.seed : ctx.abel.invert(flow_character(f, x, 0.0), f.seed);
        return std::vector<cplx>{m_plus(cplx(lam, 0.0), e, d)};
    };
    const cplx m = values(0.0)[0];
    const double V = potential_of(e, f.seed);
    auto residual = [&](const std::vector<cplx>& dm) { return std::abs(dm[0] - (V - lam - m * m)); };
    return run_flow_check(values, residual, h);
}

FlowCheck structural_identity_check(std::shared_ptr<const SpectralContext> ctx, const ThetaK& theta_k,
                                    const FlowState& f, std::span<const cplx> lams, double h) {
    if (theta_k.order() != f.k) throw ValidationError("theta_k does not match the flow order");
    FlowEvaluator fe(ctx, f);
    const auto b0 = fe.bundle_at(0.0, 0.0);
    const auto ab = ab_coefficients(chi_closed_form(ctx->bands, b0.divisor(), f.k), f.k);
    std::vector<cplx> rhs, base, th;
    for (cplx l : lams) {
        rhs.push_back(ab.a_poly(l) * sqrt_lambda(l) * b0.e_shift(l) - ab.b_poly(l) * b0.e(l));
        base.push_back(b0.e(l));
        th.push_back(theta_k(l));
    }
    auto values = [&](double t) {
        auto p = fe.product_at(0.0, t);
        std::vector<cplx> v;
        for (cplx l : lams) v.push_back(p(l));
        return v;
    };
    // d_eta^(k) = -d/dt along alpha - eta^(k) t.
    auto residual = [&](const std::vector<cplx>& de) {
        double r = 0.0;
        for (std::size_t i = 0; i < de.size(); ++i)
            r = std::max(r, std::abs(th[i] * base[i] + I * (-de[i]) - rhs[i]) / std::max(1.0, std::abs(rhs[i])));
        return r;
    };
    return run_flow_check(values, residual, h);
}

// ---------------------------------------------------------------- potential lattice

PotentialGrid potential_grid(const SpectralContext& ctx, const FlowState& f, std::vector<double> xs,
                             std::vector<double> ts, GridOptions o) {
    if (xs.empty() || ts.empty()) throw ValidationError("empty lattice");
    PotentialGrid g;
    g.x = std::move(xs);
    g.t = std::move(ts);
    g.k = f.k;
    g.flow = f;
    const std::size_t nx = g.x.size(), nt = g.t.size();
    g.V.resize(nx * nt);
    g.V_chi.resize(nx * nt);
    g.divisors.resize(nx * nt);
    g.alphas.resize(nx * nt);
    Divisor row_seed = f.seed;
    for (std::size_t i = 0; i < nt; ++i) {
        Divisor seed = row_seed;
        for (std::size_t j = 0; j < nx; ++j) {
            const std::size_t idx = i * nx + j;
            auto alpha = flow_character(f, g.x[j], o.time_sign * g.t[i]);
            Divisor d;
            try {
                d = ctx.abel.invert(alpha, seed, o.inversion);
            } catch (const InversionError& err) {
                throw InversionError(fmt::format("lattice point x={} t={}: {}", g.x[j], g.t[i], err.what()),
                                     err.residual());
            }
            g.V[idx] = potential_of(ctx.bands, d);
            g.V_chi[idx] = -2.0 * chi_closed_form(ctx.bands, d, 1).chi[1].real();
            g.alphas[idx] = alpha;
            g.divisors[idx] = d;
            seed = d;
            if (j == 0) row_seed = d;
        }
    }
    return g;
}

namespace {
double spacing(std::span<const double> v) {
    const double h = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i] - v[i - 1] - h) > 1e-9 * std::abs(h)) throw ValidationError("lattice must be uniform");
    return h;
}

double residual_at(const PotentialGrid& g, std::size_t i, std::size_t j, double hx, double ht) {
    auto V = [&](std::size_t a, std::size_t b) { return g.at(a, b); };
    const double vt = (V(i + 1, j) - V(i - 1, j)) / (2.0 * ht);
    const double vx = (V(i, j + 1) - V(i, j - 1)) / (2.0 * hx);
    const double vxxx =
        (V(i, j + 2) - 2.0 * V(i, j + 1) + 2.0 * V(i, j - 1) - V(i, j - 2)) / (2.0 * hx * hx * hx);
    return std::abs(vt - 0.25 * vxxx + 1.5 * V(i, j) * vx);
}

void require_fine(const PotentialGrid& g) {
    if (g.x.size() < 8 || g.t.size() < 8) throw ValidationError("lattice needs at least 8 points per direction");
}
} // namespace

double kdv_residual(const PotentialGrid& g) {
    require_fine(g);
    const double hx = spacing(g.x), ht = spacing(g.t);
    double r = 0.0;
    for (std::size_t i = 1; i + 1 < g.t.size(); ++i)
        for (std::size_t j = 2; j + 2 < g.x.size(); ++j) r = std::max(r, residual_at(g, i, j, hx, ht));
    return r;
}

KdVConvergence kdv_convergence(const SpectralContext& ctx, const FlowState& f, double x0, double t0, double L,
                               std::size_t n, GridOptions o) {
    if (n < 8) throw ValidationError("lattice needs at least 8 points per direction");
    KdVConvergence out;
    for (std::size_t l = 0; l < 3; ++l) {
        const std::size_t scale = std::size_t{1} << l;
        const std::size_t m = (n - 1) * scale + 1;
        std::vector<double> xs(m), ts(m);
        const double h = L / static_cast<double>(m - 1);
        for (std::size_t i = 0; i < m; ++i) {
            xs[i] = x0 + h * static_cast<double>(i);
            ts[i] = t0 + h * static_cast<double>(i);
        }
        auto g = potential_grid(ctx, f, xs, ts, o);
        // Same physical points at every level: the interior of the coarsest lattice.
        double r = 0.0;
        for (std::size_t i = 1; i + 1 < n; ++i)
            for (std::size_t j = 2; j + 2 < n; ++j) r = std::max(r, residual_at(g, i * scale, j * scale, h, h));
        out.h.push_back(h);
        out.residual.push_back(r);
    }
    out.order = empirical_orders(out.residual);
    return out;
}

// ---------------------------------------------------------------- chi_2k bound

double chi_bound_split(const BandSet& e) {
    double c = 1.0;
    for (const auto& g : e.gaps())
        if (g.width() > 0.5) c = std::max(c, g.b);
    for (const auto& g : e.gaps())
        if (g.contains(c)) c = g.b;
    return c;
}

ChiBound chi_even_bound(const BandSet& e, const Divisor& d, int k, double split) {
    if (d.size() != e.size()) throw ValidationError("divisor does not match the band set");
    if (split <= 0.0 || e.gap_index(split) >= 0) throw ValidationError("split point must be positive and off the gaps");
    auto sg = sigma_weights(e, d);
    const std::size_t n = d.size();
    ChiBound out{0.0, 0.0, split};
    double low = 0.0, high = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double l = d[m].lambda;
        out.value += sg[m] * std::pow(l, k);
        const Gap& gm = e.gap(m);
        if (gm.a < split) {
            low += sg[m];
            continue;
        }
        const double sl = std::sqrt(l);
        double pp = std::sqrt(gm.b) - sl, pm = sl - std::sqrt(gm.a);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == m) continue;
            const Gap& gj = e.gap(j);
            const double sj = std::sqrt(d[j].lambda);
            pp *= std::abs((sl - std::sqrt(gj.b)) / (sl - sj) * (sl + std::sqrt(gj.a)) / (sl + sj));
            pm *= std::abs((sl + std::sqrt(gj.b)) / (sl + sj) * (sl - std::sqrt(gj.a)) / (sl - sj));
        }
        high += (pp + pm) * std::pow(l, k);
    }
    out.bound = std::pow(split, k) * low + (1.0 + 4.0 * split) / split * high;
    return out;
}

} // namespace fgap
