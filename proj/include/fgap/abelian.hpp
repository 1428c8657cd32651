#pragma once

#include "fgap/band_geometry.hpp"
#include "fgap/numerics.hpp"
#include "fgap/real_line.hpp"

#include <vector>

namespace fgap {

// Generalized Abelian integral of order k: dTheta = Q(lambda) dlambda / sqrt(s), deg Q = N + k,
// Theta(0) = 0, Theta - lambda^(k+1/2) -> 0 at -infinity.
class ThetaK {
public:
    static ThetaK build(const BandSet& e, int k, QuadOptions o = {});

    int order() const { return k_; }
    const SqrtS& sqrt_s() const { return s_; }
    const BandSet& bands() const { return s_.bands(); }
    std::span<const double> numerator() const { return q_; }
    std::span<const double> critical_points() const { return c_; }
    // Monic factor pi^(k): Q = (k + 1/2) pi^(k) prod (lambda - c_j).
    std::span<const double> monic_factor() const { return pi_; }
    // Unreduced frequencies eta_j = -Re Theta(a_j) / pi; `periods` reduces them mod 1.
    std::span<const double> frequencies() const { return eta_; }
    CharacterVector periods() const { return CharacterVector(eta_); }
    std::span<const double> needle_heights() const { return h_; }
    double gap_residual() const { return residual_; }

    cplx derivative(cplx lam) const;
    // Theta(lambda) on the closed upper half-plane (real lambda: limit from above).
    cplx operator()(cplx lam) const;
    double martin(cplx lam) const { return (*this)(lam).imag(); }
    // Theta(x) - x^(k+1/2) for x < 0, free of cancellation for large |x|.
    cplx minus_power(double x) const;

private:
    cplx on_axis(double x) const;

    SqrtS s_;
    int k_ = 0;
    QuadOptions opt_;
    std::vector<double> q_, c_, pi_, eta_, h_;
    std::vector<double> bp_;
    std::vector<cplx> bp_val_;
    std::vector<double> tail_diff_;
    double residual_ = 0.0;
};

// Complex Green function Phi(lambda, lambda0) for real lambda0 off E:
// d log Phi = i r(lambda) dlambda / ((lambda - lambda0) sqrt(s)), |Phi| = exp(-G), Phi -> 1 at -infinity.
class GreenPole {
public:
    static GreenPole build(const BandSet& e, double lambda0, QuadOptions o = {});
    // Numerator and harmonic measures only; Phi and G are not available.
    static GreenPole measures_only(const BandSet& e, double lambda0, QuadOptions o = {});

    double pole() const { return l0_; }
    // Pole at a gap endpoint: G vanishes identically and Phi == 1.
    bool trivial() const { return trivial_; }
    std::span<const double> numerator() const { return r_; }
    double gap_residual() const { return residual_; }

    cplx dlog(cplx lam) const;
    cplx log_phi(cplx lam) const;
    cplx phi(cplx lam) const { return std::exp(log_phi(lam)); }
    double green(cplx lam) const { return -log_phi(lam).real(); }
    double green_at_minus_one() const { return g_m1_; }
    // omega(lambda0, E_k) for k = 0..N, where E_0 = E and E_k = E intersect [b_k, inf).
    double harmonic_measure(std::size_t k) const { return omega_.at(k); }
    std::span<const double> harmonic_measures() const { return omega_; }
    // Characters nu(gamma_k) = omega(lambda0, E_k), k = 1..N.
    CharacterVector character() const;

private:
    static GreenPole build_impl(const BandSet& e, double lambda0, QuadOptions o, bool with_phi);
    cplx reg(cplx z) const;
    cplx reg_axis(const Piece& p, const LineNode& n) const;
    cplx line_value(double x) const;

    SqrtS s_;
    QuadOptions opt_;
    double l0_ = 0.0;
    bool trivial_ = false;
    bool phi_ready_ = false;
    int trivial_gap_ = -1;
    bool trivial_upper_ = false;
    std::vector<double> r_, qr_;
    double sigma0_ = 0.0;
    double rl0_ = 0.0;
    double d0_ = 1.0;
    cplx zstar_;
    std::vector<Piece> pieces_;
    std::vector<cplx> cum_;
    std::vector<double> omega_;
    double g_m1_ = 0.0;
    double residual_ = 0.0;
};

// omega(lambda0, E_k) for k = 1..N packaged as a character, endpoints handled exactly.
std::vector<double> harmonic_measures(const BandSet& e, double lambda0, QuadOptions o = {});

struct WidomFunction {
    std::vector<GreenPole> factors;
    CharacterVector character;
    cplx operator()(cplx lam) const;
};

WidomFunction widom_function(const BandSet& e, const ThetaK& theta0, QuadOptions o = {});

struct WidomEntropy {
    double widom_sum;
    // (1/2pi) int_E log(rho) rho dxi / sqrt(xi), which reproduces the Widom-Martin sum.
    double entropy;
    // The same integral with the factor -2.
    double entropy_literal;
    double difference;
};

// Density rho(xi) = 2 sqrt(xi) Theta'(xi + i0) on the bands.
double ids_density(const ThetaK& theta0, double xi);
WidomEntropy widom_sum_and_entropy(const ThetaK& theta0, QuadOptions o = {});

// First-kind differentials dw_l = P_l dlambda / sqrt(s) with A-periods 2 int_{gap j} = delta_{jl};
// the numerators are purely imaginary and stored as their imaginary parts.
struct FirstKindBasis {
    SqrtS s;
    std::vector<std::vector<double>> numerators;
    cplx a_period(std::size_t l, std::size_t j, QuadOptions o = {}) const;
};

FirstKindBasis first_kind_basis(const BandSet& e, QuadOptions o = {});

struct BPeriodReport {
    std::vector<double> lhs;
    std::vector<double> rhs;
    double max_relative = 0.0;
};

// Compares 2 int_{a_j}^{0} dTheta^(k) with -2 pi i [eps^(2k)] of the first-kind integrand in the
// local coordinate lambda = eps^-2 at infinity.
BPeriodReport b_period_check(const BandSet& e, int k, QuadOptions o = {});

// Potential-theory form of M^(k): Im lambda^(k+1/2) + (1/pi) int over gaps G(xi, lambda) dxi^(k+1/2).
double martin_from_green(const BandSet& e, int k, cplx lam, QuadOptions o = {});

// [M(-1) / G(lambda, -1)] log(1 / Phi_D(lambda)) along lambda = -10^m and its extrapolated limit,
// against sum over eps_j = +1 of M(lambda_j).
struct BlaschkeLimit {
    std::vector<double> lambda;
    std::vector<double> ratio;
    double limit = 0.0;
    double error = 0.0;
    double expected = 0.0;
    double relative = 0.0;
};

BlaschkeLimit blaschke_limit(const ThetaK& theta0, const Divisor& d, int m_lo = 1, int m_hi = 6, QuadOptions o = {});

// min over the points of M(lambda)/M(-1) - G(lambda, lambda*)/G(-1, lambda*); points lie in gaps.
double green_ratio_margin(const ThetaK& theta0, double lambda_star, std::span<const double> points,
                          QuadOptions o = {});

// |Theta^(k)(lambda) - lambda^(k+1/2)| at lambda = -10^m, m = m_lo..m_hi.
std::vector<double> power_defect_decay(const ThetaK& theta, int m_lo = 0, int m_hi = 6);

} // namespace fgap
