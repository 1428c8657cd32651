#include "fgap/spectral.hpp"

#include "fgap/errors.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <random>

namespace fgap {

namespace {
constexpr cplx I{0.0, 1.0};

cplx resolvent_from(cplx lam, const SqrtS& s, const Divisor& d) {
    cplx p = 1.0;
    for (const auto& q : d) p *= lam - q.lambda;
    return I * p / (2.0 * s(lam));
}

// Residue test on the partial fractions: true when the pole at lambda_j survives in m_+.
bool pole_active(const SqrtS& s, const Divisor& d, std::size_t j, double sigma) {
    const double lj = d[j].lambda;
    cplx others = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (i != j) others *= lj - d[i].lambda;
    cplx r1 = I * s.top(lj) / others;
    cplx total = r1 - 0.5 * lj * sigma * d[j].eps;
    return std::abs(total) > 0.5 * std::abs(r1);
}

cplx m_plus_from(cplx lam, const SqrtS& s, const BandSet& e, const Divisor& d, std::span<const double> sigma,
                 double m0) {
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (sigma[j] == 0.0) continue;
        const double w = e.gap(j).width();
        if (std::abs(lam - d[j].lambda) < 1e-12 * w && pole_active(s, d, j, sigma[j]))
            throw NumericalError(fmt::format("m_+ evaluated at its pole {}", d[j].lambda));
    }
    cplx v = -1.0 / (2.0 * resolvent_from(lam, s, d));
    for (std::size_t j = 0; j < d.size(); ++j)
        if (sigma[j] != 0.0) v += lam * sigma[j] * static_cast<double>(d[j].eps) / (2.0 * (d[j].lambda - lam));
    return v + m0;
}
} // namespace

std::vector<double> sigma_weights(const BandSet& e, const Divisor& d) {
    if (d.size() != e.size()) throw ValidationError("divisor does not match the band set");
    std::vector<double> sg(d.size(), 0.0);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const Gap& g = e.gap(k);
        const double l = d[k].lambda;
        if (is_endpoint(g, l)) continue;
        double v = 2.0 * std::sqrt((l - g.a) * (g.b - l)) / std::sqrt(l);
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j == k) continue;
            const Gap& h = e.gap(j);
            v *= std::sqrt((1.0 - h.a / l) * (1.0 - h.b / l)) / std::abs(1.0 - d[j].lambda / l);
        }
        sg[k] = v;
    }
    return sg;
}

cplx resolvent_R(cplx lam, const BandSet& e, const Divisor& d) {
    if (lam == cplx(0.0, 0.0)) throw ValidationError("the resolvent is unbounded at 0");
    return resolvent_from(lam, SqrtS(e), d);
}

double m_plus_at_zero(const BandSet& e, const Divisor& d) {
    auto sg = sigma_weights(e, d);
    double m = 0.0;
    for (std::size_t j = 0; j < sg.size(); ++j) m += 0.5 * sg[j] * d[j].eps;
    return m;
}

cplx m_plus(cplx lam, const BandSet& e, const Divisor& d) {
    auto sg = sigma_weights(e, d);
    return m_plus_from(lam, SqrtS(e), e, d, sg, m_plus_at_zero(e, d));
}

cplx m_minus(cplx lam, const BandSet& e, const Divisor& d) {
    return -1.0 / resolvent_R(lam, e, d) - m_plus(lam, e, d);
}

// ---------------------------------------------------------------- context and products

std::shared_ptr<const SpectralContext> SpectralContext::build(const BandSet& e, QuadOptions o) {
    auto theta0 = ThetaK::build(e, 0, o);
    auto abel = AbelMap::build(theta0, o);
    std::vector<GreenPole> crit;
    for (double c : theta0.critical_points()) crit.push_back(GreenPole::build(e, c, o));
    return std::make_shared<const SpectralContext>(
        SpectralContext{e, o, std::move(theta0), std::move(abel), std::move(crit), CharacterVector::half(e.size())});
}

cplx SpectralContext::widom(cplx lam) const {
    cplx s = 0.0;
    for (const auto& g : critical) s += g.log_phi(lam);
    return std::exp(s);
}

CanonicalProduct CanonicalProduct::build(std::shared_ptr<const SpectralContext> ctx, const Divisor& d) {
    if (d.size() != ctx->bands.size()) throw ValidationError("divisor does not match the band set");
    CanonicalProduct p;
    p.d_ = d;
    for (const auto& q : d) p.poles_.push_back(GreenPole::build(ctx->bands, q.lambda, ctx->quad));
    p.ctx_ = std::move(ctx);
    return p;
}

std::pair<cplx, cplx> CanonicalProduct::pair(cplx lam) const {
    const auto c = ctx_->theta0.critical_points();
    cplx common = 0.0, plus = 0.0, minus = 0.0;
    for (std::size_t j = 0; j < d_.size(); ++j) {
        const double lj = d_[j].lambda;
        if (lam == cplx(lj, 0.0) || lam == cplx(c[j], 0.0))
            throw ValidationError(fmt::format("canonical product evaluated at a divisor or critical point {}", lam.real()));
        const cplx lp = poles_[j].log_phi(lam);
        common += 0.5 * (std::log(lam - lj) - std::log(lam - c[j]) + ctx_->critical[j].log_phi(lam) - lp);
        (d_[j].eps > 0 ? plus : minus) += lp;
    }
    return {std::exp(common + plus), std::exp(common + minus)};
}

cplx e_function(cplx lam, const BandSet& e, const Divisor& d, QuadOptions o) {
    return CanonicalProduct::build(SpectralContext::build(e, o), d)(lam);
}

// ---------------------------------------------------------------- bundle

SpectralBundle SpectralBundle::build(std::shared_ptr<const SpectralContext> ctx, const Divisor& d,
                                     InversionOptions io) {
    SpectralBundle b;
    b.alpha_ = ctx->abel(d);
    b.sigma_ = sigma_weights(ctx->bands, d);
    b.m0_ = m_plus_at_zero(ctx->bands, d);
    b.e_ = CanonicalProduct::build(ctx, d);
    Divisor d1 = ctx->abel.invert(b.alpha_ + ctx->jshift, d, io);
    b.e1_ = CanonicalProduct::build(ctx, d1);
    b.ctx_ = std::move(ctx);
    return b;
}

cplx SpectralBundle::R(cplx lam) const {
    if (lam == cplx(0.0, 0.0)) throw ValidationError("the resolvent is unbounded at 0");
    return resolvent_from(lam, ctx_->theta0.sqrt_s(), divisor());
}

cplx SpectralBundle::m_plus(cplx lam) const {
    return m_plus_from(lam, ctx_->theta0.sqrt_s(), ctx_->bands, divisor(), sigma_, m0_);
}

cplx SpectralBundle::m_minus(cplx lam) const { return -1.0 / R(lam) - m_plus(lam); }

cplx SpectralBundle::m_plus_ratio(cplx lam) const {
    return m0_ + I * half_power(lam, 0) * e1_(lam) / e_(lam);
}

cplx SpectralBundle::m_minus_ratio(cplx lam) const {
    return -m0_ + I * half_power(lam, 0) * e1_.reflected(lam) / e_.reflected(lam);
}

cplx SpectralBundle::wronskian_lhs(cplx lam) const {
    auto [ea, ta] = e_.pair(lam);
    auto [ej, tj] = e1_.pair(lam);
    return ej * ta + ea * tj;
}

cplx SpectralBundle::wronskian_rhs(cplx lam) const {
    return ctx_->widom(lam) / (half_power(lam, 0) * ctx_->theta0.derivative(lam));
}

cplx SpectralBundle::r11(cplx lam) const {
    cplx mp = m_plus(lam);
    cplx mm = m_minus(lam);
    return (mp - m0_) * (mm + m0_) / (mp + mm);
}

cplx SpectralBundle::kernel(cplx lam, cplx lam0) const {
    if (lam == std::conj(lam0)) throw ValidationError("kernel evaluated at lambda = conj(lambda0)");
    const cplx r = half_power(lam, 0), r0 = half_power(lam0, 0);
    return I * (r * e1_(lam) * std::conj(e_(lam0)) + e_(lam) * std::conj(r0 * e1_(lam0))) / (lam - std::conj(lam0));
}

cplx kernel_k_alpha(const SpectralBundle& b, cplx lam, cplx lam0) { return b.kernel(lam, lam0); }

// ---------------------------------------------------------------- flows

FlowEvaluator::FlowEvaluator(std::shared_ptr<const SpectralContext> ctx, FlowState f, InversionOptions io)
    : ctx_(std::move(ctx)), f_(std::move(f)), io_(io) {}

Divisor FlowEvaluator::divisor_at(double x, double t) const {
    if (x == 0.0 && t == 0.0) return f_.seed;
    return ctx_->abel.invert(flow_character(f_, x, t), f_.seed, io_);
}

CanonicalProduct FlowEvaluator::product_at(double x, double t) const {
    return CanonicalProduct::build(ctx_, divisor_at(x, t));
}

SpectralBundle FlowEvaluator::bundle_at(double x, double t) const {
    return SpectralBundle::build(ctx_, divisor_at(x, t), io_);
}

cplx weyl_solution(const FlowEvaluator& f, double x, cplx lam) {
    const cplx th = f.context().theta0(lam);
    return std::exp(I * th * x) * f.product_at(x)(lam) / f.product_at(0.0)(lam);
}

cplx baker_akhiezer(const FlowEvaluator& f, const ThetaK& theta_k, double x, double t, cplx lam) {
    const cplx th = f.context().theta0(lam);
    return std::exp(I * (th * x + theta_k(lam) * t)) * f.product_at(x, t)(lam);
}

// ---------------------------------------------------------------- identity battery

std::vector<cplx> sample_upper(const BandSet& e, std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> re(-3.0, e.top() + 2.0), im(0.05, 2.0);
    std::vector<cplx> out;
    for (std::size_t i = 0; i < n; ++i) {
        double x = re(rng);
        double y = im(rng);
        out.emplace_back(x, y);
    }
    return out;
}

std::vector<double> sample_bands(const BandSet& e, std::size_t n, unsigned seed) {
    std::mt19937 rng(seed);
    auto bands = e.bands();
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        const Band& b = bands[i % bands.size()];
        double lo = b.lo, hi = std::isfinite(b.hi) ? b.hi : b.lo + 3.0;
        double w = hi - lo;
        std::uniform_real_distribution<double> u(lo + 0.05 * w, hi - 0.05 * w);
        out.push_back(u(rng));
    }
    return out;
}

double fourier_identity_residual(const SpectralBundle& b, double x, cplx lam, cplx lam0, double tol) {
    const auto& ctx = b.context();
    FlowState fs;
    fs.alpha0 = b.alpha();
    fs.eta.assign(ctx.theta0.frequencies().begin(), ctx.theta0.frequencies().end());
    fs.eta_k.assign(fs.eta.size(), 0.0);
    fs.k = 0;
    fs.seed = b.divisor();
    FlowEvaluator fe(b.context_ptr(), fs);
    const cplx kappa = ctx.theta0(lam) - std::conj(ctx.theta0(lam0));
    const cplx lhs = b.kernel(lam, lam0) - std::exp(I * kappa * x) * fe.bundle_at(x).kernel(lam, lam0);
    auto g = [&](double xi) {
        auto p = fe.product_at(xi);
        return std::exp(I * kappa * xi) * p(lam) * std::conj(p(lam0));
    };
    const cplx rhs = detail::adaptive_gk(g, 0.0, x, QuadOptions{tol, 20});
    return std::abs(lhs - rhs);
}

IdentityReport identity_suite(const SpectralBundle& b, IdentityOptions o) {
    IdentityReport r;
    const auto& ctx = b.context();
    auto pts = sample_upper(ctx.bands, o.samples, o.seed);
    r.samples = pts.size();
    for (cplx z : pts) {
        cplx rhs = b.wronskian_rhs(z);
        r.wronskian = std::max(r.wronskian, std::abs(b.wronskian_lhs(z) - rhs) / std::max(1.0, std::abs(rhs)));
        cplx mp = b.m_plus(z);
        r.m_route = std::max(r.m_route, std::abs(mp - b.m_plus_ratio(z)) / std::max(1.0, std::abs(mp)));
        cplx inv = -1.0 / b.R(z);
        r.resolvent_sum = std::max(r.resolvent_sum, std::abs(mp + b.m_minus_ratio(z) - inv) / std::max(1.0, std::abs(inv)));
    }
    for (double xi : sample_bands(ctx.bands, o.band_samples, o.seed + 1)) {
        auto p = boundary_limit([&](cplx z) { return ctx.widom(z) * std::conj(b.e(z)) - b.e_tilde(z); }, xi);
        r.pseudocontinuation = std::max(r.pseudocontinuation, std::abs(p));
        auto q = boundary_limit([&](cplx z) { return b.m_plus(z) + std::conj(b.m_minus_ratio(z)); }, xi);
        r.reflectionless = std::max(r.reflectionless, std::abs(q));
    }
    if (!o.fourier_x.empty() && pts.size() >= 2) {
        for (double x : o.fourier_x)
            r.fourier = std::max(r.fourier, fourier_identity_residual(b, x, pts[0], pts[1], o.fourier_tol));
    }
    return r;
}

} // namespace fgap
