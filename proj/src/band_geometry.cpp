#include "fgap/band_geometry.hpp"

#include "fgap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace fgap {

BandSet validate_bandset(std::span<const std::pair<double, double>> raw, GeometryGuard guard) {
    std::vector<Gap> g;
    g.reserve(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        auto [a, b] = raw[j];
        if (!std::isfinite(a) || !std::isfinite(b))
            throw ValidationError(fmt::format("gap {} has a non-finite endpoint", j + 1));
        if (a <= 0.0) throw ValidationError(fmt::format("gap {} starts at a <= 0", j + 1));
        if (a >= b) throw ValidationError(fmt::format("gap {} has a >= b", j + 1));
        if (b - a < guard.min_relative_width * std::max(1.0, b))
            throw ValidationError(fmt::format("gap {} is narrower than the width guard", j + 1));
        g.push_back({a, b});
    }
    std::vector<std::size_t> order(g.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return g[l].a < g[r].a; });
    BandSet e;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const Gap& cur = g[order[k]];
        if (k > 0) {
            const Gap& prev = g[order[k - 1]];
            auto lo = std::min(order[k - 1], order[k]) + 1;
            auto hi = std::max(order[k - 1], order[k]) + 1;
            if (cur.a <= prev.b) throw ValidationError(fmt::format("overlapping gaps {},{}", lo, hi));
            if (cur.a - prev.b < guard.min_relative_width * std::max(1.0, cur.a))
                throw ValidationError(fmt::format("gaps {},{} are closer than the separation guard", lo, hi));
        }
        e.gaps_.push_back(cur);
    }
    return e;
}

BandSet validate_bandset(std::initializer_list<std::pair<double, double>> raw, GeometryGuard guard) {
    std::vector<std::pair<double, double>> v(raw);
    return validate_bandset(std::span<const std::pair<double, double>>(v), guard);
}

BandSet truncate_bandset(const BandSet& e, std::size_t n) {
    if (n > e.size())
        throw ValidationError(fmt::format("cannot truncate {} gaps to {}", e.size(), n));
    std::vector<std::pair<double, double>> raw;
    for (std::size_t j = 0; j < n; ++j) raw.emplace_back(e.gap(j).a, e.gap(j).b);
    return validate_bandset(std::span<const std::pair<double, double>>(raw), GeometryGuard{0.0});
}

std::vector<double> BandSet::branch_points() const {
    std::vector<double> p{0.0};
    for (const auto& g : gaps_) {
        p.push_back(g.a);
        p.push_back(g.b);
    }
    return p;
}

std::vector<Band> BandSet::bands() const {
    std::vector<Band> out;
    double lo = 0.0;
    for (const auto& g : gaps_) {
        out.push_back({lo, g.a});
        lo = g.b;
    }
    out.push_back({lo, std::numeric_limits<double>::infinity()});
    return out;
}

int BandSet::gap_index(double x) const {
    for (std::size_t j = 0; j < gaps_.size(); ++j)
        if (gaps_[j].contains(x)) return static_cast<int>(j);
    return -1;
}

bool BandSet::on_spectrum(double x) const { return x >= 0.0 && gap_index(x) < 0; }

bool is_endpoint(const Gap& g, double x) { return x == g.a || x == g.b; }

Divisor make_divisor(const BandSet& e, std::span<const DivisorPoint> pts) {
    if (pts.size() != e.size())
        throw ValidationError(fmt::format("divisor has {} points for {} gaps", pts.size(), e.size()));
    Divisor d;
    for (std::size_t j = 0; j < pts.size(); ++j) {
        const Gap& g = e.gap(j);
        auto p = pts[j];
        if (!std::isfinite(p.lambda) || p.lambda < g.a || p.lambda > g.b)
            throw ValidationError(fmt::format("divisor point {} = {} lies outside [{}, {}]", j + 1,
                                              p.lambda, g.a, g.b));
        if (p.eps != 1 && p.eps != -1)
            throw ValidationError(fmt::format("divisor point {} has sign {}", j + 1, p.eps));
        if (is_endpoint(g, p.lambda)) p.eps = 1;
        d.pts_.push_back(p);
    }
    return d;
}

Divisor make_divisor(const BandSet& e, std::initializer_list<DivisorPoint> pts) {
    std::vector<DivisorPoint> v(pts);
    return make_divisor(e, std::span<const DivisorPoint>(v));
}

Divisor reflect_divisor(const BandSet& e, const Divisor& d) {
    std::vector<DivisorPoint> v(d.begin(), d.end());
    for (auto& p : v) p.eps = -p.eps;
    return make_divisor(e, std::span<const DivisorPoint>(v));
}

Divisor critical_divisor(const BandSet& e, std::span<const double> c) {
    std::vector<DivisorPoint> v;
    for (double x : c) v.push_back({x, -1});
    return make_divisor(e, std::span<const DivisorPoint>(v));
}

double wrap_unit(double x) {
    double r = x - std::floor(x);
    return r >= 1.0 ? 0.0 : r;
}

double wrap_signed(double x) {
    double r = wrap_unit(x + 0.5) - 0.5;
    return r;
}

CharacterVector::CharacterVector(std::vector<double> raw) : c_(std::move(raw)) {
    for (auto& x : c_) x = wrap_unit(x);
}

CharacterVector CharacterVector::operator+(const CharacterVector& o) const {
    std::vector<double> r(c_.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = c_[j] + o.c_[j];
    return CharacterVector(std::move(r));
}

CharacterVector CharacterVector::operator-(const CharacterVector& o) const {
    std::vector<double> r(c_.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = c_[j] - o.c_[j];
    return CharacterVector(std::move(r));
}

CharacterVector CharacterVector::operator-() const {
    std::vector<double> r(c_.size());
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = -c_[j];
    return CharacterVector(std::move(r));
}

CharacterVector CharacterVector::half(std::size_t n) { return CharacterVector(std::vector<double>(n, 0.5)); }

double torus_distance(const CharacterVector& a, const CharacterVector& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, std::abs(wrap_signed(a[j] - b[j])));
    return d;
}

DivisorChart divisor_chart(const BandSet& e, const Divisor& d) {
    if (d.size() != e.size()) throw ValidationError("divisor and band set differ in size");
    DivisorChart c;
    for (std::size_t j = 0; j < d.size(); ++j) {
        const Gap& g = e.gap(j);
        double x = d[j].lambda;
        if (x < g.a || x > g.b)
            throw ValidationError(fmt::format("divisor point {} lies outside its gap", j + 1));
        double phi;
        if (x == g.a)
            phi = 0.0;
        else if (x == g.b)
            phi = std::numbers::pi;
        else {
            phi = std::acos(std::clamp((g.mid() - x) / g.half_width(), -1.0, 1.0));
            if (d[j].eps < 0) phi = 2.0 * std::numbers::pi - phi;
        }
        c.phi.push_back(phi);
    }
    return c;
}

Divisor chart_to_divisor(const BandSet& e, const DivisorChart& c) {
    if (c.phi.size() != e.size()) throw ValidationError("chart and band set differ in size");
    std::vector<DivisorPoint> v;
    for (std::size_t j = 0; j < c.phi.size(); ++j) {
        const Gap& g = e.gap(j);
        double phi = c.phi[j] - 2.0 * std::numbers::pi * std::floor(c.phi[j] / (2.0 * std::numbers::pi));
        double x;
        if (phi == 0.0)
            x = g.a;
        else if (phi == std::numbers::pi)
            x = g.b;
        else
            x = std::clamp(g.mid() - g.half_width() * std::cos(phi), g.a, g.b);
        int eps = phi <= std::numbers::pi ? 1 : -1;
        v.push_back({x, eps});
    }
    return make_divisor(e, std::span<const DivisorPoint>(v));
}

} // namespace fgap
