#include "config.hpp"

#include "fgap/errors.hpp"

#include <boost/container_hash/hash.hpp>
#include <fmt/format.h>
#include <fstream>

namespace fgap::app {

using nlohmann::json;

std::vector<double> LatticeSpec::points() const {
    if (count == 0) throw ValidationError("lattice count must be positive");
    if (count == 1) return {min};
    std::vector<double> p(count);
    const double h = (max - min) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) p[i] = min + h * static_cast<double>(i);
    return p;
}

BandSet RunConfig::bands() const { return validate_bandset(std::span<const std::pair<double, double>>(gaps)); }

Divisor RunConfig::divisor_for(const BandSet& e) const {
    if (divisor.empty()) {
        std::vector<DivisorPoint> pts;
        for (const auto& g : e.gaps()) pts.push_back({g.a + 0.3 * g.width(), 1});
        return make_divisor(e, std::span<const DivisorPoint>(pts));
    }
    return make_divisor(e, std::span<const DivisorPoint>(divisor));
}

namespace {
LatticeSpec parse_lattice(const json& j, LatticeSpec d) {
    d.min = j.value("min", d.min);
    d.max = j.value("max", d.max);
    d.count = j.value("count", d.count);
    if (!(d.max >= d.min)) throw ValidationError("lattice max must not be below min");
    return d;
}

json lattice_json(const LatticeSpec& l) { return {{"min", l.min}, {"max", l.max}, {"count", l.count}}; }
} // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    RunConfig c;
    try {
        c.version = j.value("version", kConfigVersion);
        if (c.version != kConfigVersion) throw ValidationError(fmt::format("unsupported config version {}", c.version));
        if (j.contains("gaps")) {
            c.gaps.clear();
            for (const auto& g : j.at("gaps")) {
                if (!g.is_array() || g.size() != 2) throw ValidationError("each gap must be a pair [a, b]");
                c.gaps.emplace_back(g[0].get<double>(), g[1].get<double>());
            }
        }
        if (j.contains("divisor")) {
            for (const auto& p : j.at("divisor")) {
                if (p.is_array()) {
                    if (p.size() != 2) throw ValidationError("divisor points are [lambda, eps]");
                    c.divisor.push_back({p[0].get<double>(), p[1].get<int>()});
                } else {
                    c.divisor.push_back({p.at("lambda").get<double>(), p.at("eps").get<int>()});
                }
            }
        }
        c.k = j.value("k", c.k);
        c.k_cap = j.value("k_cap", c.k_cap);
        if (j.contains("lattice")) {
            const auto& l = j.at("lattice");
            if (l.contains("x")) c.x = parse_lattice(l.at("x"), c.x);
            if (l.contains("t")) c.t = parse_lattice(l.at("t"), c.t);
        }
        if (j.contains("quad")) {
            c.quad.tol = j.at("quad").value("tol", c.quad.tol);
            c.quad.max_depth = j.at("quad").value("max_depth", c.quad.max_depth);
        }
        c.seed = j.value("seed", c.seed);
        c.out = j.value("out", c.out);
        if (j.contains("tolerances"))
            for (const auto& [name, v] : j.at("tolerances").items()) c.tolerances[name] = v.get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed config: {}", e.what()));
    }
    if (c.k < 0 || c.k > c.k_cap) throw ValidationError(fmt::format("k = {} outside [0, {}]", c.k, c.k_cap));
    if (!(c.quad.tol > 0.0)) throw ValidationError("quadrature tolerance must be positive");
    // Validate geometry and divisor before anything else runs.
    auto e = c.bands();
    if (!c.divisor.empty()) (void)c.divisor_for(e);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(fmt::format("cannot open config {}", path));
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("{}: {}", path, e.what()));
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json gaps = json::array();
    for (const auto& [a, b] : c.gaps) gaps.push_back({a, b});
    json div = json::array();
    for (const auto& p : c.divisor) div.push_back({p.lambda, p.eps});
    return {{"version", c.version},
            {"gaps", gaps},
            {"divisor", div},
            {"k", c.k},
            {"k_cap", c.k_cap},
            {"lattice", {{"x", lattice_json(c.x)}, {"t", lattice_json(c.t)}}},
            {"quad", {{"tol", c.quad.tol}, {"max_depth", c.quad.max_depth}}},
            {"seed", c.seed},
            {"out", c.out},
            {"tolerances", c.tolerances}};
}

std::string config_hash(const RunConfig& c) {
    const std::string s = to_json(c).dump();
    std::size_t h = boost::hash_range(s.begin(), s.end());
    return fmt::format("{:016x}", h);
}

} // namespace fgap::app
