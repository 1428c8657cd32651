#pragma once

#include "fgap/abelian.hpp"
#include "fgap/band_geometry.hpp"
#include "fgap/numerics.hpp"

#include <vector>

namespace fgap {

struct InversionOptions {
    double tol = 1e-12;
    // Central-difference step in the angle chart.
    double fd_step = 1e-6;
    int max_newton = 12;
    // Smallest homotopy step, as a fraction of the whole path.
    double min_step = 1e-8;
    QuadOptions quad{};
};

struct InversionReport {
    double residual = 0.0;
    int steps = 0;
    int newton_iterations = 0;
};

class AbelMap {
public:
    static AbelMap build(const BandSet& e, QuadOptions o = {});
    static AbelMap build(const ThetaK& theta0, QuadOptions o = {});

    const BandSet& bands() const { return e_; }
    std::span<const double> critical_points() const { return c_; }
    const Divisor& critical_divisor() const { return dc_; }
    // alpha_W = sum_j nu(c_j), the character of the Widom function.
    const CharacterVector& widom_character() const { return widom_; }

    // A(D)_k = (1/2) sum_j eps_j omega(lambda_j, E_k) mod 1.
    CharacterVector raw(const Divisor& d) const;
    // alpha(D) = A(D) - A(D_c).
    CharacterVector operator()(const Divisor& d) const;

    Divisor invert(const CharacterVector& target, InversionOptions o = {}) const { return invert(target, dc_, o); }
    Divisor invert(const CharacterVector& target, const Divisor& seed, InversionOptions o = {},
                   InversionReport* report = nullptr) const;

private:
    std::vector<double> point_term(std::size_t j, double phi) const;
    std::vector<double> shifted_unreduced(std::span<const double> phi) const;

    BandSet e_;
    QuadOptions opt_;
    std::vector<double> c_;
    Divisor dc_;
    std::vector<double> half_base_;
    CharacterVector widom_;
};

// Divisor point on gap j for a chart angle, with exact endpoints at phi = 0 and pi.
DivisorPoint chart_point(const Gap& g, double phi);

struct FlowState {
    CharacterVector alpha0;
    // Unreduced frequencies: eta for x and eta^(k) for t.
    std::vector<double> eta;
    std::vector<double> eta_k;
    int k = 1;
    Divisor seed;
};

FlowState make_flow(const AbelMap& abel, const ThetaK& theta0, const ThetaK& theta_k, const Divisor& d0);

// alpha0 - eta x - eta^(k) t mod 1.
CharacterVector flow_character(const FlowState& f, double x, double t);

} // namespace fgap
