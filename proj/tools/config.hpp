#pragma once

#include "fgap/band_geometry.hpp"
#include "fgap/numerics.hpp"

#include <json.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fgap::app {

inline constexpr int kConfigVersion = 1;

struct LatticeSpec {
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 16;

    std::vector<double> points() const;
};

struct RunConfig {
    int version = kConfigVersion;
    std::vector<std::pair<double, double>> gaps{{1.0, 2.0}};
    // Empty means one point at 0.3 of every gap with eps = +1.
    std::vector<DivisorPoint> divisor;
    int k = 1;
    int k_cap = 3;
    LatticeSpec x{0.0, 2.0, 32};
    LatticeSpec t{0.0, 0.5, 8};
    QuadOptions quad{};
    unsigned seed = 1;
    std::string out = "fgap_out";
    // Per-check tolerance overrides, keyed by check name.
    std::map<std::string, double> tolerances;

    BandSet bands() const;
    Divisor divisor_for(const BandSet& e) const;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);
// Hex digest of the canonical JSON form.
std::string config_hash(const RunConfig& c);

} // namespace fgap::app
