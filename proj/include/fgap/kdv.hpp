#pragma once

#include "fgap/abel_flow.hpp"
#include "fgap/spectral.hpp"

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

namespace fgap {

enum class ChiSource { ClosedForm, AsymptoticOracle };

// Sign pattern of the even coefficients chi_2m = (i/2) sum sigma_j eps_j lambda_j^m, fixed against
// the asymptotic oracle.
struct ChiConvention {
    static constexpr bool even_terms_carry_eps = true;
};

struct ChiCoefficients {
    int order = 0;
    std::vector<cplx> chi;
    // tau_m = int xi^m f^D(xi) dxi, m = 0..k.
    std::vector<double> tau;
    std::vector<ChiSource> source;
};

std::vector<double> gap_moments(const BandSet& e, const Divisor& d, int mmax);
ChiCoefficients chi_closed_form(const BandSet& e, const Divisor& d, int k);

struct ChiOracle {
    std::vector<cplx> chi;
    std::vector<double> error;
    bool truncation_warning = false;
};

// Peels (m_+(mu^2) - m_+(0)) / (i mu) = 1 + chi_0/mu + ... along mu = i y, y -> infinity.
ChiOracle chi_asymptotic_oracle(const BandSet& e, const Divisor& d, int n);

struct KdVCoefficients {
    int k = 0;
    std::vector<cplx> A;
    std::vector<cplx> B;
    Eigen::MatrixXcd chi_o;
    Eigen::MatrixXcd chi_e;

    cplx a_poly(cplx lam) const;
    cplx b_poly(cplx lam) const;
};

KdVCoefficients ab_coefficients(const ChiCoefficients& chi, int k);

// Central difference of f at 0 with step h, and its Richardson improvement from h and h/2.
template <class F>
auto central_difference(F&& f, double h) {
    return (f(h) - f(-h)) / (2.0 * h);
}

template <class F>
auto richardson_derivative(F&& f, double h) {
    auto d1 = central_difference(f, h);
    auto d2 = central_difference(f, 0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

struct FlowCheck {
    std::vector<double> h;
    std::vector<double> residual;
    // log2 of successive residual ratios.
    std::vector<double> order;
    // Residual with the Richardson derivative from the two finest steps.
    double extrapolated = 0.0;
    double max_residual() const;
};

// B_n - (i d_eta / 2 + chi_0) A_n with d_eta f(alpha) = -d/dx f(alpha - eta x).
FlowCheck b_from_a_identity_check(const SpectralContext& ctx, const FlowState& f, int k, double h = 1e-2);

struct ChiOneAgreement {
    double from_derivative;
    double from_moments;
    double from_trace;
    double max_relative;
};

ChiOneAgreement chi1_three_way(const SpectralContext& ctx, const FlowState& f, double h = 1e-3);

// d/dx m_+^{alpha - eta x}(lambda) at 0 against V(0) - lambda - m_+(lambda)^2.
FlowCheck riccati_check(const SpectralContext& ctx, const FlowState& f, double lam = -2.0, double h = 1e-2);

// (Theta^(k) + i d_eta^(k)) e_alpha against A_k sqrt(lambda) e_{alpha+j} - B_k e_alpha, with the
// derivative taken along alpha - eta^(k) t.
FlowCheck structural_identity_check(std::shared_ptr<const SpectralContext> ctx, const ThetaK& theta_k,
                                    const FlowState& f, std::span<const cplx> lams, double h = 1e-2);

struct GridOptions {
    // V(x, t) is taken at the character alpha0 - eta x - time_sign * eta^(k) t.
    double time_sign = -1.0;
    InversionOptions inversion{};
};

struct PotentialGrid {
    std::vector<double> x;
    std::vector<double> t;
    // Row-major in t: V[i * x.size() + j] at (x[j], t[i]).
    std::vector<double> V;
    std::vector<double> V_chi;
    std::vector<Divisor> divisors;
    std::vector<CharacterVector> alphas;
    int k = 1;
    FlowState flow;

    double at(std::size_t ti, std::size_t xi) const { return V[ti * x.size() + xi]; }
};

PotentialGrid potential_grid(const SpectralContext& ctx, const FlowState& f, std::vector<double> xs,
                             std::vector<double> ts, GridOptions o = {});

// max |V_t - V_xxx / 4 + 3 V V_x / 2| over interior points; requires equal spacing.
double kdv_residual(const PotentialGrid& g);

struct KdVConvergence {
    std::vector<double> h;
    std::vector<double> residual;
    std::vector<double> order;
};

// Residuals on the square [x0, x0 + L] x [t0, t0 + L] with n, 2n - 1, 4n - 3 points per side.
KdVConvergence kdv_convergence(const SpectralContext& ctx, const FlowState& f, double x0, double t0, double L,
                               std::size_t n, GridOptions o = {});

// Per-divisor bound on sum sigma_j lambda_j^k from the rho+- decomposition of Z(mu).
struct ChiBound {
    double value;
    double bound;
    double split;
};

double chi_bound_split(const BandSet& e);
ChiBound chi_even_bound(const BandSet& e, const Divisor& d, int k, double split);

// Linear interpolation in log2 of residual ratios.
std::vector<double> empirical_orders(std::span<const double> residual);

} // namespace fgap
