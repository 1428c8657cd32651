#pragma once

#include "fgap/band_geometry.hpp"

#include <random>
#include <vector>

namespace fgap::testing {

inline BandSet one_gap() { return validate_bandset({{1.0, 2.0}}); }
inline BandSet two_gap() { return validate_bandset({{1.0, 2.0}, {3.0, 3.7}}); }
inline BandSet three_gap() { return validate_bandset({{0.5, 1.0}, {2.0, 2.6}, {4.0, 4.3}}); }

// Interior points at fractions in [0.05, 0.95] of each gap with random signs.
inline Divisor random_divisor(const BandSet& e, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::bernoulli_distribution coin(0.5);
    std::vector<DivisorPoint> pts;
    for (const auto& g : e.gaps()) pts.push_back({g.a + u(rng) * g.width(), coin(rng) ? 1 : -1});
    return make_divisor(e, std::span<const DivisorPoint>(pts));
}

inline Divisor fraction_divisor(const BandSet& e, double f, int eps = 1) {
    std::vector<DivisorPoint> pts;
    for (const auto& g : e.gaps()) pts.push_back({g.a + f * g.width(), eps});
    return make_divisor(e, std::span<const DivisorPoint>(pts));
}

} // namespace fgap::testing
