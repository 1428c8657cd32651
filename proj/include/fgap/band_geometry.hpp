#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace fgap {

struct Gap {
    double a;
    double b;
    double mid() const { return 0.5 * (a + b); }
    double half_width() const { return 0.5 * (b - a); }
    double width() const { return b - a; }
    bool contains(double x) const { return a < x && x < b; }
    bool operator==(const Gap&) const = default;
};

// A closed interval of the spectrum; hi is +infinity for the last band.
struct Band {
    double lo;
    double hi;
};

struct GeometryGuard {
    double min_relative_width = 1e-9;
};

// E = [0, inf) with the open gaps (a_j, b_j) removed. N = 0 is the free case.
class BandSet {
public:
    BandSet() = default;

    std::size_t size() const { return gaps_.size(); }
    bool empty() const { return gaps_.empty(); }
    const Gap& gap(std::size_t j) const { return gaps_[j]; }
    std::span<const Gap> gaps() const { return gaps_; }

    // Sorted branch points 0 < a_1 < b_1 < ... < b_N.
    std::vector<double> branch_points() const;
    std::vector<Band> bands() const;

    // Index of the gap containing x (open), or -1.
    int gap_index(double x) const;
    bool on_spectrum(double x) const;
    double top() const { return gaps_.empty() ? 0.0 : gaps_.back().b; }

    bool operator==(const BandSet&) const = default;

private:
    friend BandSet validate_bandset(std::span<const std::pair<double, double>>, GeometryGuard);
    std::vector<Gap> gaps_;
};

BandSet validate_bandset(std::span<const std::pair<double, double>> raw, GeometryGuard guard = {});
BandSet validate_bandset(std::initializer_list<std::pair<double, double>> raw, GeometryGuard guard = {});
BandSet truncate_bandset(const BandSet& e, std::size_t n);

struct DivisorPoint {
    double lambda;
    int eps;
    bool operator==(const DivisorPoint&) const = default;
};

// One Dirichlet point per gap closure; endpoints carry eps = +1.
class Divisor {
public:
    Divisor() = default;
    std::size_t size() const { return pts_.size(); }
    const DivisorPoint& operator[](std::size_t j) const { return pts_[j]; }
    std::span<const DivisorPoint> points() const { return pts_; }
    auto begin() const { return pts_.begin(); }
    auto end() const { return pts_.end(); }
    bool operator==(const Divisor&) const = default;

private:
    friend Divisor make_divisor(const BandSet&, std::span<const DivisorPoint>);
    std::vector<DivisorPoint> pts_;
};

Divisor make_divisor(const BandSet& e, std::span<const DivisorPoint> pts);
Divisor make_divisor(const BandSet& e, std::initializer_list<DivisorPoint> pts);
Divisor reflect_divisor(const BandSet& e, const Divisor& d);
// D_c = {(c_j, -1)} for the given points c_j inside the gaps.
Divisor critical_divisor(const BandSet& e, std::span<const double> c);
bool is_endpoint(const Gap& g, double x);

// Point of the N-torus, components in [0, 1).
class CharacterVector {
public:
    CharacterVector() = default;
    explicit CharacterVector(std::size_t n) : c_(n, 0.0) {}
    explicit CharacterVector(std::vector<double> raw);

    std::size_t size() const { return c_.size(); }
    double operator[](std::size_t j) const { return c_[j]; }
    std::span<const double> components() const { return c_; }

    CharacterVector operator+(const CharacterVector& o) const;
    CharacterVector operator-(const CharacterVector& o) const;
    CharacterVector operator-() const;
    bool operator==(const CharacterVector&) const = default;

    static CharacterVector half(std::size_t n);

private:
    std::vector<double> c_;
};

double wrap_unit(double x);
// Signed representative of x mod 1 in [-1/2, 1/2).
double wrap_signed(double x);
double torus_distance(const CharacterVector& a, const CharacterVector& b);

struct DivisorChart {
    std::vector<double> phi;
};

DivisorChart divisor_chart(const BandSet& e, const Divisor& d);
Divisor chart_to_divisor(const BandSet& e, const DivisorChart& c);

} // namespace fgap
