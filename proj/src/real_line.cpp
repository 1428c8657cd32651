#include "fgap/real_line.hpp"

#include <algorithm>

namespace fgap {

namespace {
constexpr cplx I{0.0, 1.0};

cplx unit_power(int n) {
    switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
    }
}
} // namespace

SqrtS::SqrtS(BandSet e) : e_(std::move(e)), bp_(e_.branch_points()) {}

cplx SqrtS::phase(double x) const {
    int above = 0;
    for (double c : bp_)
        if (x < c) ++above;
    return unit_power(above);
}

double SqrtS::abs_root(double x) const {
    double p = 1.0;
    for (double c : bp_) p *= std::sqrt(std::abs(x - c));
    return p;
}

cplx SqrtS::top(double x) const { return phase(x) * abs_root(x); }

cplx SqrtS::operator()(cplx lam) const {
    if (lam.imag() == 0.0) return top(lam.real());
    cplx r = I * std::sqrt(-lam);
    for (const auto& g : e_.gaps()) r *= std::sqrt(lam - g.a) * std::sqrt(lam - g.b);
    return r;
}

double SqrtS::s(double x) const {
    double p = 1.0;
    for (double c : bp_) p *= x - c;
    return p;
}

cplx SqrtS::s(cplx z) const {
    cplx p = 1.0;
    for (double c : bp_) p *= z - c;
    return p;
}

cplx SqrtS::divided_difference(cplx z, double z0) const {
    const std::size_t n = bp_.size();
    std::vector<cplx> pre(n + 1, 1.0);
    std::vector<double> suf(n + 1, 1.0);
    for (std::size_t l = 0; l < n; ++l) pre[l + 1] = pre[l] * (z - bp_[l]);
    for (std::size_t l = n; l-- > 0;) suf[l] = suf[l + 1] * (z0 - bp_[l]);
    cplx sum = 0.0;
    for (std::size_t m = 0; m < n; ++m) sum += pre[m] * suf[m + 1];
    return sum;
}

Piece make_piece(const SqrtS& s, double lo, double hi) {
    auto bp = s.branch_points();
    bool lb = std::find(bp.begin(), bp.end(), lo) != bp.end();
    bool hb = std::find(bp.begin(), bp.end(), hi) != bp.end();
    return {PieceKind::Finite, lo, hi, lb, hb, s.phase(0.5 * (lo + hi))};
}

Piece negative_tail(const SqrtS& s, double hi) {
    return {PieceKind::NegativeTail, -std::numeric_limits<double>::infinity(), hi, false, false,
            s.phase(hi)};
}

Piece positive_tail(const SqrtS& s, double lo) {
    return {PieceKind::PositiveTail, lo, std::numeric_limits<double>::infinity(), false, false,
            s.phase(lo + 1.0)};
}

std::vector<Piece> standard_pieces(const SqrtS& s, double l) {
    std::vector<Piece> out;
    out.push_back(negative_tail(s, -l));
    out.push_back(make_piece(s, -l, 0.0));
    auto bp = s.branch_points();
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) out.push_back(make_piece(s, bp[i], bp[i + 1]));
    double t = tail_split(bp.back());
    out.push_back(make_piece(s, bp.back(), t));
    out.push_back(positive_tail(s, t));
    return out;
}

std::size_t piece_index(std::span<const Piece> pieces, double x) {
    for (std::size_t i = 0; i < pieces.size(); ++i)
        if (x <= pieces[i].hi) return i;
    return pieces.size() - 1;
}

LineNode finite_node(const SqrtS& s, const Piece& p, double theta) {
    IntervalPoint ip = detail::angle_point(p.lo, p.hi, theta);
    double jac = std::sqrt(ip.from_lo * ip.to_hi);
    double w = 1.0;
    if (!p.lo_branch) w *= std::sqrt(ip.from_lo);
    if (!p.hi_branch) w *= std::sqrt(ip.to_hi);
    double prod = 1.0;
    for (double c : s.branch_points()) {
        if (p.lo_branch && c == p.lo) continue;
        if (p.hi_branch && c == p.hi) continue;
        prod *= std::abs(ip.x - c);
    }
    return {ip.x, jac, w / (std::sqrt(prod) * p.phase), ip.from_lo, ip.to_hi};
}

LineNode tail_node(const SqrtS& s, const Piece& p, double v) {
    double v2 = v * v;
    double sign = p.kind == PieceKind::NegativeTail ? -1.0 : 1.0;
    double xi = sign / v2;
    double jac = 2.0 / (v2 * v);
    double prod = 1.0;
    for (const auto& g : s.bands().gaps()) prod *= (1.0 - sign * g.a * v2) * (1.0 - sign * g.b * v2);
    double reduced = 2.0 * std::pow(v, 2.0 * static_cast<double>(s.genus()) - 2.0) / std::sqrt(prod);
    return {xi, jac, reduced / p.phase};
}

cplx half_power(cplx lam, int k) {
    cplx r = lam.imag() == 0.0 && lam.real() > 0.0 ? cplx(std::sqrt(lam.real()), 0.0) : I * std::sqrt(-lam);
    for (int i = 0; i < k; ++i) r *= lam;
    return r;
}

} // namespace fgap
