#pragma once

#include "fgap/abel_flow.hpp"
#include "fgap/abelian.hpp"
#include "fgap/band_geometry.hpp"

#include <memory>
#include <vector>

namespace fgap {

// sigma_k of the Dirichlet points; zero at gap endpoints.
std::vector<double> sigma_weights(const BandSet& e, const Divisor& d);
// Diagonal resolvent R = i prod (lambda - lambda_j) / (2 sqrt(s)).
cplx resolvent_R(cplx lam, const BandSet& e, const Divisor& d);
// m_+(0) = (1/2) sum sigma_j eps_j.
double m_plus_at_zero(const BandSet& e, const Divisor& d);
// Partial-fraction form of m_+; a point within 1e-12 gap widths of an active pole throws.
cplx m_plus(cplx lam, const BandSet& e, const Divisor& d);
// m_- = -1/R - m_+.
cplx m_minus(cplx lam, const BandSet& e, const Divisor& d);

// Data shared by every divisor over one band set.
struct SpectralContext {
    BandSet bands;
    QuadOptions quad;
    ThetaK theta0;
    AbelMap abel;
    std::vector<GreenPole> critical;
    // The shift j as a character: sqrt(lambda) changes sign around every gap.
    CharacterVector jshift;

    static std::shared_ptr<const SpectralContext> build(const BandSet& e, QuadOptions o = {});
    cplx widom(cplx lam) const;
};

// e(lambda, D) and e(lambda, tau D) on the closed upper half-plane, normalized to 1 at -infinity.
class CanonicalProduct {
public:
    static CanonicalProduct build(std::shared_ptr<const SpectralContext> ctx, const Divisor& d);

    const Divisor& divisor() const { return d_; }
    cplx operator()(cplx lam) const { return pair(lam).first; }
    cplx reflected(cplx lam) const { return pair(lam).second; }
    std::pair<cplx, cplx> pair(cplx lam) const;

private:
    std::shared_ptr<const SpectralContext> ctx_;
    Divisor d_;
    std::vector<GreenPole> poles_;
};

// Free-function form of e(lambda, D); builds its own context.
cplx e_function(cplx lam, const BandSet& e, const Divisor& d, QuadOptions o = {});

class SpectralBundle {
public:
    static SpectralBundle build(std::shared_ptr<const SpectralContext> ctx, const Divisor& d,
                                InversionOptions io = {});

    const SpectralContext& context() const { return *ctx_; }
    std::shared_ptr<const SpectralContext> context_ptr() const { return ctx_; }
    const Divisor& divisor() const { return e_.divisor(); }
    // Divisor realizing alpha + j.
    const Divisor& shifted_divisor() const { return e1_.divisor(); }
    const CharacterVector& alpha() const { return alpha_; }

    cplx R(cplx lam) const;
    double m_plus_zero() const { return m0_; }
    cplx m_plus(cplx lam) const;
    cplx m_minus(cplx lam) const;
    // m_+(0) + i sqrt(lambda) e_{alpha+j} / e_alpha, and the reflected-divisor form of m_-.
    cplx m_plus_ratio(cplx lam) const;
    cplx m_minus_ratio(cplx lam) const;

    cplx e(cplx lam) const { return e_(lam); }
    cplx e_tilde(cplx lam) const { return e_.reflected(lam); }
    cplx e_shift(cplx lam) const { return e1_(lam); }
    cplx e_tilde_shift(cplx lam) const { return e1_.reflected(lam); }
    const CanonicalProduct& product() const { return e_; }
    const CanonicalProduct& shifted_product() const { return e1_; }

    cplx wronskian_lhs(cplx lam) const;
    cplx wronskian_rhs(cplx lam) const;
    // (m_+ - m_+(0))(m_- - m_-(0)) / (m_+ + m_-), real in the gaps.
    cplx r11(cplx lam) const;

    cplx kernel(cplx lam, cplx lam0) const;

private:
    std::shared_ptr<const SpectralContext> ctx_;
    CharacterVector alpha_;
    double m0_ = 0.0;
    std::vector<double> sigma_;
    CanonicalProduct e_, e1_;
};

cplx kernel_k_alpha(const SpectralBundle& b, cplx lam, cplx lam0);

// Divisors and canonical products along alpha0 - eta x - eta^(k) t.
class FlowEvaluator {
public:
    FlowEvaluator(std::shared_ptr<const SpectralContext> ctx, FlowState f, InversionOptions io = {});

    const FlowState& state() const { return f_; }
    const SpectralContext& context() const { return *ctx_; }
    Divisor divisor_at(double x, double t = 0.0) const;
    CanonicalProduct product_at(double x, double t = 0.0) const;
    SpectralBundle bundle_at(double x, double t = 0.0) const;

private:
    std::shared_ptr<const SpectralContext> ctx_;
    FlowState f_;
    InversionOptions io_;
};

// u_+ = exp(i Theta x) e_{alpha - eta x} / e_alpha.
cplx weyl_solution(const FlowEvaluator& f, double x, cplx lam);
// Psi = exp(i Theta x + i Theta^(k) t) e_{alpha - eta x - eta^(k) t}.
cplx baker_akhiezer(const FlowEvaluator& f, const ThetaK& theta_k, double x, double t, cplx lam);

struct IdentityReport {
    double wronskian = 0.0;
    double pseudocontinuation = 0.0;
    double reflectionless = 0.0;
    double fourier = 0.0;
    double m_route = 0.0;
    double resolvent_sum = 0.0;
    std::size_t samples = 0;
};

struct IdentityOptions {
    std::size_t samples = 20;
    std::size_t band_samples = 10;
    std::vector<double> fourier_x{0.1, 0.5, 1.0};
    unsigned seed = 1;
    double fourier_tol = 1e-9;
};

IdentityReport identity_suite(const SpectralBundle& b, IdentityOptions o = {});

// Residual of k^alpha - exp(i(Theta - conj Theta0) x) k^{alpha - eta x} against the integral of
// exp(i(Theta - conj Theta0) xi) e_{alpha - eta xi}(lambda) conj(e_{alpha - eta xi}(lambda0)).
double fourier_identity_residual(const SpectralBundle& b, double x, cplx lam, cplx lam0, double tol = 1e-9);

// Boundary value at xi + i0 from samples at xi + i delta, delta = 1e-4, 1e-5, 1e-6.
template <class F>
cplx boundary_limit(F&& f, double xi) {
    const double h[3] = {1e-4, 1e-5, 1e-6};
    cplx v[3];
    for (int i = 0; i < 3; ++i) v[i] = f(cplx(xi, h[i]));
    return richardson_limit<cplx>(h, v, 1.0).value;
}

// Points in the upper half-plane used by the sampled checks.
std::vector<cplx> sample_upper(const BandSet& e, std::size_t n, unsigned seed);
// Interior band points, spread over the bands including the last one.
std::vector<double> sample_bands(const BandSet& e, std::size_t n, unsigned seed);

} // namespace fgap
