#include "battery.hpp"

#include "fgap/abel_flow.hpp"
#include "fgap/abelian.hpp"
#include "fgap/errors.hpp"
#include "fgap/kdv.hpp"
#include "fgap/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <memory>
#include <optional>
#include <random>

namespace fgap::app {

namespace {
constexpr double kFailed = 1e300;
constexpr cplx I{0.0, 1.0};

struct Outcome {
    double residual = 0.0;
    std::string detail;
    std::optional<bool> pass;
};

class Env {
public:
    explicit Env(const RunConfig& c) : cfg(c), e(c.bands()), d(c.divisor_for(e)), rng(c.seed) {}

    const RunConfig& cfg;
    BandSet e;
    Divisor d;
    std::mt19937 rng;

    int k() const { return std::max(1, cfg.k); }

    std::shared_ptr<const SpectralContext> ctx() {
        if (!ctx_) ctx_ = SpectralContext::build(e, cfg.quad);
        return ctx_;
    }
    const ThetaK& theta_k() {
        if (!theta_k_) theta_k_ = ThetaK::build(e, k(), cfg.quad);
        return *theta_k_;
    }
    const ThetaK& theta1() {
        if (!theta1_) theta1_ = ThetaK::build(e, 1, cfg.quad);
        return *theta1_;
    }
    FlowState flow() { return make_flow(ctx()->abel, ctx()->theta0, theta_k(), d); }
    FlowState flow1() { return make_flow(ctx()->abel, ctx()->theta0, theta1(), d); }
    const IdentityReport& identities() {
        if (!ids_) {
            auto b = SpectralBundle::build(ctx(), d);
            IdentityOptions o;
            o.seed = cfg.seed;
            ids_ = identity_suite(b, o);
        }
        return *ids_;
    }
    Divisor random_divisor() {
        std::uniform_real_distribution<double> u(0.02, 0.98);
        std::bernoulli_distribution coin(0.5);
        std::vector<DivisorPoint> pts;
        for (const auto& g : e.gaps()) pts.push_back({g.a + u(rng) * g.width(), coin(rng) ? 1 : -1});
        return make_divisor(e, std::span<const DivisorPoint>(pts));
    }

private:
    std::shared_ptr<const SpectralContext> ctx_;
    std::optional<ThetaK> theta_k_, theta1_;
    std::optional<IdentityReport> ids_;
};

struct Check {
    std::string name;
    std::string anchor;
    int criterion;
    double tolerance;
    std::function<Outcome(Env&)> run;
};

// Second-order convergence, or an identity that holds exactly.
Outcome order_outcome(std::span<const double> residual, std::span<const double> order) {
    Outcome o;
    const double worst = *std::max_element(residual.begin(), residual.end());
    if (worst < 1e-12) {
        o.residual = 0.0;
        o.detail = fmt::format("residuals {:.3g} (exact)", worst);
        o.pass = true;
        return o;
    }
    double dev = 0.0;
    for (double p : order) dev = std::max(dev, std::abs(p - 2.0));
    o.residual = dev;
    o.detail = fmt::format("residuals [{:.3g}], orders [{:.4g}]", fmt::join(residual, ", "), fmt::join(order, ", "));
    return o;
}

Divisor empty_divisor() { return make_divisor(BandSet{}, std::span<const DivisorPoint>{}); }

std::vector<Check> checks() {
    std::vector<Check> c;
    c.push_back({"free_potential", "free case: V vanishes identically", 1, 1e-10, [](Env& env) {
                     BandSet e0;
                     auto ctx = SpectralContext::build(e0, env.cfg.quad);
                     auto f = make_flow(ctx->abel, ctx->theta0, ThetaK::build(e0, 1, env.cfg.quad), empty_divisor());
                     LatticeSpec l{0.0, 1.0, 32};
                     auto g = potential_grid(*ctx, f, l.points(), l.points());
                     double m = 0.0;
                     for (double v : g.V) m = std::max(m, std::abs(v));
                     return Outcome{m, "32 x 32 lattice", {}};
                 }});
    c.push_back({"free_m_plus", "free case: m_+(-1) = -1", 1, 1e-12, [](Env&) {
                     return Outcome{std::abs(m_plus(cplx(-1.0, 0.0), BandSet{}, empty_divisor()) + 1.0), "", {}};
                 }});
    c.push_back({"free_theta", "free case: Theta(-1) = i", 1, 1e-12, [](Env& env) {
                     auto th = ThetaK::build(BandSet{}, 0, env.cfg.quad);
                     return Outcome{std::abs(th(cplx(-1.0, 0.0)) - I), "", {}};
                 }});
    c.push_back({"gap_conditions", "gap normalization of dTheta^(k) and d log Phi", 2, 1e-10, [](Env& env) {
                     double r = std::max(env.ctx()->theta0.gap_residual(),
                                         ThetaK::build(env.e, 1, env.cfg.quad).gap_residual());
                     r = std::max(r, GreenPole::build(env.e, -1.0, env.cfg.quad).gap_residual());
                     for (const auto& g : env.ctx()->critical) r = std::max(r, g.gap_residual());
                     return Outcome{r, "k = 0, 1 and poles at -1 and the critical points", {}};
                 }});
    c.push_back({"harmonic_total", "harmonic measure of the whole spectrum is 1", 3, 1e-10, [](Env& env) {
                     auto g = GreenPole::measures_only(env.e, -1.0, env.cfg.quad);
                     return Outcome{std::abs(g.harmonic_measure(0) - 1.0), "", {}};
                 }});
    c.push_back({"harmonic_monotone", "harmonic measures of E_k strictly decrease in k", 3, 0.0, [](Env& env) {
                     auto g = GreenPole::measures_only(env.e, -1.0, env.cfg.quad);
                     auto w = g.harmonic_measures();
                     std::vector<double> v(w.begin(), w.end());
                     v.push_back(0.0);
                     double r = -std::numeric_limits<double>::infinity();
                     for (std::size_t i = 0; i + 1 < v.size(); ++i) r = std::max(r, v[i + 1] - v[i]);
                     return Outcome{r, fmt::format("omega = [{:.6g}]", fmt::join(w, ", ")), r < 0.0};
                 }});
    c.push_back({"abel_round_trip", "Abel map is a homeomorphism onto the torus", 4, 1e-8, [](Env& env) {
                     const auto& abel = env.ctx()->abel;
                     double r = 0.0;
                     for (int i = 0; i < 50; ++i) {
                         Divisor d = env.random_divisor();
                         Divisor back = abel.invert(abel(d));
                         for (std::size_t j = 0; j < d.size(); ++j)
                             r = std::max(r, std::abs(back[j].lambda - d[j].lambda) + (back[j].eps != d[j].eps));
                     }
                     return Outcome{r, "50 random divisors", {}};
                 }});
    c.push_back({"wronskian", "Wronskian identity for e and the reflected product", 5, 1e-8,
                 [](Env& env) { return Outcome{env.identities().wronskian, "20 points in the upper half-plane", {}}; }});
    c.push_back({"m_route", "m_+ partial fractions against the canonical product ratio", 6, 1e-8,
                 [](Env& env) { return Outcome{env.identities().m_route, "relative", {}}; }});
    c.push_back({"resolvent_sum", "m_+ + m_- = -1/R", 6, 1e-9,
                 [](Env& env) { return Outcome{env.identities().resolvent_sum, "", {}}; }});
    c.push_back({"reflectionless", "m_+(xi + i0) = -conj m_-(xi + i0) on the bands", 7, 1e-4,
                 [](Env& env) { return Outcome{env.identities().reflectionless, "10 band samples", {}}; }});
    c.push_back({"pseudocontinuation", "boundary values of e and e-tilde across the bands", 7, 1e-4,
                 [](Env& env) { return Outcome{env.identities().pseudocontinuation, "10 band samples", {}}; }});
    c.push_back({"fourier", "reproducing kernel as a Fourier integral along the flow", 8, 1e-6,
                 [](Env& env) { return Outcome{env.identities().fourier, "x in {0.1, 0.5, 1.0}", {}}; }});
    c.push_back({"chi1_three_way", "chi_1 from the eta-derivative, the moments and the trace formula", 9, 1e-6,
                 [](Env& env) {
                     auto a = chi1_three_way(*env.ctx(), env.flow());
                     return Outcome{a.max_relative,
                                    fmt::format("{:.15g} {:.15g} {:.15g}", a.from_derivative, a.from_moments,
                                                a.from_trace),
                                    {}};
                 }});
    c.push_back({"riccati", "Riccati equation for m_+ along the x-flow", 9, 0.2, [](Env& env) {
                     auto r = riccati_check(*env.ctx(), env.flow());
                     return order_outcome(r.residual, r.order);
                 }});
    c.push_back({"kdv_order", "KdV_1 residual of the generated potential", 10, 0.2, [](Env& env) {
                     // Box shrinks with the band edge so the coarsest step resolves the oscillation.
                     const double top = env.e.empty() ? 2.0 : std::max(2.0, env.e.gap(env.e.size() - 1).b);
                     auto kc = kdv_convergence(*env.ctx(), env.flow1(), 0.0, 0.0, std::sqrt(2.0 / top), 9);
                     if (env.e.empty()) {
                         const double m = *std::max_element(kc.residual.begin(), kc.residual.end());
                         return Outcome{m, "free case must vanish exactly", m == 0.0};
                     }
                     return order_outcome(kc.residual, kc.order);
                 }});
    c.push_back({"structural_identity", "(Theta^(k) + i d_eta^(k)) e = A_k sqrt(lambda) e_(alpha+j) - B_k e", 11, 0.2,
                 [](Env& env) {
                     auto lams = sample_upper(env.e, 5, env.cfg.seed);
                     auto r = structural_identity_check(env.ctx(), env.theta_k(), env.flow(), lams);
                     return order_outcome(r.residual, r.order);
                 }});
    c.push_back({"b_from_a", "B_n = (i d_eta / 2 + chi_0) A_n", 11, 1e-5, [](Env& env) {
                     auto r = b_from_a_identity_check(*env.ctx(), env.flow(), env.k());
                     return Outcome{r.extrapolated,
                                    fmt::format("raw residuals [{:.3g}]", fmt::join(r.residual, ", ")), {}};
                 }});
    c.push_back({"b_period", "B-periods of dTheta^(1) from the first-kind expansion at infinity", 12, 1e-6,
                 [](Env& env) {
                     if (env.e.empty()) return Outcome{0.0, "no gaps", {}};
                     return Outcome{b_period_check(env.e, 1, env.cfg.quad).max_relative, "relative", {}};
                 }});
    c.push_back({"blaschke_limit", "normalized log 1/Phi_D tends to the Martin sum over the divisor", 13, 1e-3,
                 [](Env& env) {
                     auto b = blaschke_limit(env.ctx()->theta0, env.d, 1, 6, env.cfg.quad);
                     return Outcome{b.relative, fmt::format("limit {:.12g} expected {:.12g}", b.limit, b.expected), {}};
                 }});
    c.push_back({"power_defect_decay", "Theta^(k)(-y^2) - (iy)^(2k+1) decays monotonically", 13, 0.0, [](Env& env) {
                     double r = -1.0;
                     std::string det;
                     for (const ThetaK* th : {&env.ctx()->theta0, &env.theta_k()}) {
                         auto s = power_defect_decay(*th, 2, 6);
                         for (std::size_t i = 0; i + 1 < s.size(); ++i)
                             r = std::max(r, s[i] == 0.0 ? (s[i + 1] > 0.0 ? 1.0 : -1.0) : (s[i + 1] - s[i]) / s[i]);
                         det += fmt::format("k={}: [{:.3g}] ", th->order(), fmt::join(s, ", "));
                     }
                     return Outcome{r, det, r <= 0.0};
                 }});
    c.push_back({"entropy", "Widom-Martin sum against the density-of-states entropy integral", 14, 1e-6, [](Env& env) {
                     auto w = widom_sum_and_entropy(env.ctx()->theta0, env.cfg.quad);
                     return Outcome{std::abs(w.difference),
                                    fmt::format("sum {:.12g} entropy {:.12g}", w.widom_sum, w.entropy), {}};
                 }});
    c.push_back({"truncation", "canonical products of nested truncations converge", 15, 1.0, [](Env& env) {
                     auto s = truncation_study(6, env.cfg.quad);
                     double r = *std::max_element(s.ratios.begin(), s.ratios.end());
                     return Outcome{r,
                                    fmt::format("differences [{:.3g}]", fmt::join(s.differences, ", ")), s.pass};
                 }});
    c.push_back({"chi_oracle", "chi_n from moments and sigma sums against the asymptotic expansion of m_+", 0, 1e-7,
                 [](Env& env) {
                     auto cf = chi_closed_form(env.e, env.d, env.k());
                     auto orc = chi_asymptotic_oracle(env.e, env.d, 2 * env.k());
                     double r = 0.0;
                     for (std::size_t n = 0; n < cf.chi.size(); ++n)
                         r = std::max(r, std::abs(cf.chi[n] - orc.chi[n]) / std::max(1.0, std::abs(orc.chi[n])));
                     return Outcome{r, fmt::format("n = 0..{}", cf.chi.size() - 1), {}};
                 }});
    c.push_back({"ab_triangular", "A = chi_o^-1 delta_0 and B = chi_e A", 0, 1e-12, [](Env& env) {
                     auto ab = ab_coefficients(chi_closed_form(env.e, env.d, env.k()), env.k());
                     const auto n = static_cast<Eigen::Index>(ab.A.size());
                     Eigen::VectorXcd a = Eigen::Map<const Eigen::VectorXcd>(ab.A.data(), n);
                     Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(ab.B.data(), n);
                     Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(n);
                     delta(0) = 1.0;
                     double r = (ab.chi_o * a - delta).cwiseAbs().maxCoeff();
                     r = std::max(r, (ab.chi_e * a - b).cwiseAbs().maxCoeff());
                     return Outcome{r, "", {}};
                 }});
    c.push_back({"trace_cross", "trace formula against -2 chi_1 from the moments", 0, 1e-9, [](Env& env) {
                     double r = 0.0;
                     for (int i = 0; i < 20; ++i) {
                         Divisor d = env.random_divisor();
                         double v = 0.0;
                         for (std::size_t j = 0; j < d.size(); ++j)
                             v += env.e.gap(j).a + env.e.gap(j).b - 2.0 * d[j].lambda;
                         r = std::max(r, std::abs(v + 2.0 * chi_closed_form(env.e, d, 1).chi[1].real()));
                     }
                     return Outcome{r, "20 random divisors", {}};
                 }});
    c.push_back({"chi_bound", "sum sigma_j lambda_j^k bounded through the rho+- decomposition", 0, 1.0, [](Env& env) {
                     double r = 0.0;
                     if (env.e.empty()) return Outcome{0.0, "no gaps", true};
                     const double split = chi_bound_split(env.e);
                     for (int i = 0; i < 100; ++i) {
                         auto b = chi_even_bound(env.e, env.random_divisor(), env.k(), split);
                         r = std::max(r, b.value / b.bound);
                     }
                     return Outcome{r, fmt::format("worst value/bound over 100 divisors, split {}", split), r <= 1.0};
                 }});
    c.push_back({"green_ratio", "M(lambda)/M(-1) >= G(lambda, lambda*)/G(-1, lambda*) in the gaps", 0, 0.0,
                 [](Env& env) {
                     std::vector<double> pts;
                     for (const auto& g : env.e.gaps())
                         for (double f : {0.01, 0.25, 0.5, 0.75, 0.99}) pts.push_back(g.a + f * g.width());
                     if (pts.empty()) return Outcome{0.0, "no gaps", true};
                     double m = std::numeric_limits<double>::infinity();
                     for (double ls : {-1.5, -5.0, -50.0})
                         m = std::min(m, green_ratio_margin(env.ctx()->theta0, ls, pts, env.cfg.quad));
                     return Outcome{-m, fmt::format("min margin {:.6g}", m), m >= 0.0};
                 }});
    return c;
}
} // namespace

std::vector<std::string> battery_names() {
    std::vector<std::string> n;
    for (const auto& c : checks()) n.push_back(c.name);
    return n;
}

std::vector<CheckRecord> run_battery(const RunConfig& cfg, const std::set<std::string>& only) {
    Env env(cfg);
    std::vector<CheckRecord> out;
    for (const auto& c : checks()) {
        if (!only.empty() && !only.contains(c.name)) continue;
        CheckRecord r{c.name, c.anchor, c.criterion, 0.0, c.tolerance, false, {}};
        if (auto it = cfg.tolerances.find(c.name); it != cfg.tolerances.end()) r.tolerance = it->second;
        try {
            Outcome o = c.run(env);
            r.residual = o.residual;
            r.detail = o.detail;
            r.pass = o.pass.value_or(o.residual <= r.tolerance);
        } catch (const std::exception& e) {
            r.residual = kFailed;
            r.detail = e.what();
            r.pass = false;
        }
        if (!std::isfinite(r.residual)) {
            r.residual = kFailed;
            r.pass = false;
        }
        out.push_back(std::move(r));
    }
    return out;
}

TruncationStudy truncation_study(std::size_t nmax, QuadOptions o) {
    if (nmax < 3) throw ValidationError("truncation study needs at least three levels");
    TruncationStudy s;
    std::vector<DivisorPoint> pts;
    for (std::size_t j = 1; j <= nmax; ++j) {
        const double w = std::pow(4.0, -static_cast<double>(j));
        const double c = static_cast<double>(j) + 1.0;
        s.gaps.emplace_back(c - 0.5 * w, c + 0.5 * w);
        pts.push_back({c - 0.5 * w + 0.3 * w, j % 2 == 1 ? 1 : -1});
    }
    s.samples = {{-2.0, 0.5}, {-0.5, 1.0}, {0.5, 0.5}, {1.0, 2.0}, {3.0, 1.0}};
    auto full = validate_bandset(std::span<const std::pair<double, double>>(s.gaps));
    std::vector<std::vector<cplx>> values;
    for (std::size_t n = 1; n <= nmax; ++n) {
        auto e = truncate_bandset(full, n);
        auto ctx = SpectralContext::build(e, o);
        auto prod = CanonicalProduct::build(ctx, make_divisor(e, std::span<const DivisorPoint>(pts.data(), n)));
        std::vector<cplx> v;
        for (cplx l : s.samples) v.push_back(prod(l));
        values.push_back(std::move(v));
    }
    for (std::size_t n = 0; n + 1 < values.size(); ++n) {
        double m = 0.0;
        for (std::size_t i = 0; i < s.samples.size(); ++i) m = std::max(m, std::abs(values[n][i] - values[n + 1][i]));
        s.differences.push_back(m);
    }
    s.pass = true;
    for (std::size_t n = 0; n + 1 < s.differences.size(); ++n) {
        s.ratios.push_back(s.differences[n + 1] / s.differences[n]);
        s.pass = s.pass && s.ratios.back() < 1.0;
    }
    return s;
}

} // namespace fgap::app
