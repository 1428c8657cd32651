#pragma once

#include "fgap/band_geometry.hpp"
#include "fgap/numerics.hpp"

#include <optional>
#include <vector>

namespace fgap {

// sqrt(s(lambda)) with s = lambda * prod (lambda - a_j)(lambda - b_j), cut along E,
// sqrt(s) ~ lambda^N sqrt(lambda) at -infinity and sqrt(lambda) = i sqrt(-lambda).
class SqrtS {
public:
    SqrtS() = default;
    explicit SqrtS(BandSet e);

    const BandSet& bands() const { return e_; }
    std::size_t genus() const { return e_.size(); }
    std::span<const double> branch_points() const { return bp_; }

    // Closed upper half-plane; a real argument means the boundary value from above.
    cplx operator()(cplx lam) const;
    cplx top(double x) const;
    // Unit kappa with top(x) = kappa * |s(x)|^(1/2).
    cplx phase(double x) const;
    double abs_root(double x) const;
    double s(double x) const;
    cplx s(cplx z) const;
    // (s(z) - s(z0)) / (z - z0), from the product form.
    cplx divided_difference(cplx z, double z0) const;

private:
    BandSet e_;
    std::vector<double> bp_;
};

enum class PieceKind { NegativeTail, Finite, PositiveTail };

// Interval of the real axis between consecutive split points, approached from above.
struct Piece {
    PieceKind kind;
    double lo;
    double hi;
    bool lo_branch;
    bool hi_branch;
    cplx phase;
};

// Quadrature node: xi, jac = dxi/dparam, js = jac / sqrt(s(xi + i0)) computed without
// endpoint cancellation. from_lo / to_hi are exact distances to the piece ends (infinite on tails).
struct LineNode {
    double xi;
    double jac;
    cplx js;
    double from_lo = std::numeric_limits<double>::infinity();
    double to_hi = std::numeric_limits<double>::infinity();
};

Piece make_piece(const SqrtS& s, double lo, double hi);
Piece negative_tail(const SqrtS& s, double hi);
Piece positive_tail(const SqrtS& s, double lo);

// Standard partition: (-inf, -l], [-l, 0], bands and gaps, [b_N, tail], [tail, inf).
std::vector<Piece> standard_pieces(const SqrtS& s, double l);
// Index of the piece containing x (the first whose closure contains it).
std::size_t piece_index(std::span<const Piece> pieces, double x);

LineNode finite_node(const SqrtS& s, const Piece& p, double theta);
LineNode tail_node(const SqrtS& s, const Piece& p, double v);

// Integral of f(LineNode) in the piece parameter: from the start of the piece to `upto`
// (or over the whole piece).
template <class F>
auto integrate_piece(const SqrtS& s, const Piece& p, F&& f, const QuadOptions& o = {},
                     std::optional<double> upto = std::nullopt) {
    switch (p.kind) {
    case PieceKind::Finite: {
        double th = upto ? detail::angle_of(p.lo, p.hi, *upto) : std::numbers::pi;
        auto g = [&](double theta) { return f(finite_node(s, p, theta)); };
        return detail::adaptive_gk(g, 0.0, th, o);
    }
    case PieceKind::NegativeTail: {
        double vmax = 1.0 / std::sqrt(-(upto ? *upto : p.hi));
        auto g = [&](double v) { return f(tail_node(s, p, v)); };
        return detail::adaptive_gk(g, 0.0, vmax, o);
    }
    case PieceKind::PositiveTail:
    default: {
        double vlo = upto ? 1.0 / std::sqrt(*upto) : 0.0;
        double vhi = 1.0 / std::sqrt(p.lo);
        auto g = [&](double v) { return f(tail_node(s, p, v)); };
        return detail::adaptive_gk(g, vlo, vhi, o);
    }
    }
}

// lambda^(k + 1/2) = lambda^k sqrt(lambda) with sqrt(lambda) = i sqrt(-lambda).
cplx half_power(cplx lam, int k);

} // namespace fgap
