#include "battery.hpp"
#include "config.hpp"

#include "fgap/abel_flow.hpp"
#include "fgap/abelian.hpp"
#include "fgap/errors.hpp"
#include "fgap/kdv.hpp"
#include "fgap/spectral.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fgap;
using namespace fgap::app;

namespace {

enum Exit { kPass = 0, kValidation = 1, kNumerical = 2, kVerification = 3 };

json divisor_json(const Divisor& d) {
    json j = json::array();
    for (const auto& p : d) j.push_back({p.lambda, p.eps});
    return j;
}

json character_json(const CharacterVector& a) {
    json j = json::array();
    for (std::size_t k = 0; k < a.size(); ++k) j.push_back(a[k]);
    return j;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", p.string()));
}

json environment_json() {
    return {{"compiler", fmt::format("g++ {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__)},
            {"cxx", static_cast<long>(__cplusplus)},
            {"config_version", kConfigVersion}};
}

int run_geometry(const RunConfig& c, const fs::path& out) {
    auto e = c.bands();
    auto th0 = ThetaK::build(e, 0, c.quad);
    auto thk = ThetaK::build(e, std::max(1, c.k), c.quad);
    auto we = widom_sum_and_entropy(th0, c.quad);
    auto gm = GreenPole::build(e, -1.0, c.quad);
    auto span_json = [](std::span<const double> s) { return json(std::vector<double>(s.begin(), s.end())); };
    json j = {{"config_hash", config_hash(c)},
              {"gaps", to_json(c)["gaps"]},
              {"critical_points", span_json(th0.critical_points())},
              {"frequencies", span_json(th0.frequencies())},
              {"needle_heights", span_json(th0.needle_heights())},
              {"frequencies_k", span_json(thk.frequencies())},
              {"k", thk.order()},
              {"gap_residual_theta0", th0.gap_residual()},
              {"gap_residual_theta_k", thk.gap_residual()},
              {"gap_residual_green", gm.gap_residual()},
              {"harmonic_measures_at_minus_one", span_json(gm.harmonic_measures())},
              {"widom_sum", we.widom_sum},
              {"entropy", we.entropy},
              {"entropy_literal", we.entropy_literal}};
    write_json(out / "geometry.json", j);
    fmt::print("geometry: N = {}, widom sum {:.12g}, entropy {:.12g}\n", e.size(), we.widom_sum, we.entropy);
    return kPass;
}

int run_potential(const RunConfig& c, const fs::path& out) {
    auto e = c.bands();
    auto d = c.divisor_for(e);
    auto ctx = SpectralContext::build(e, c.quad);
    auto f = make_flow(ctx->abel, ctx->theta0, ThetaK::build(e, std::max(1, c.k), c.quad), d);
    const auto xs = c.x.points(), ts = c.t.points();
    GridOptions go;

    std::string csv = "x,t,V\n";
    json traj = json::array();
    std::string failure;
    FlowState row = f;
    for (double t : ts) {
        try {
            auto g = potential_grid(*ctx, row, xs, {t}, go);
            for (std::size_t j = 0; j < xs.size(); ++j) {
                csv += fmt::format("{:.17g},{:.17g},{:.17g}\n", xs[j], t, g.V[j]);
                traj.push_back({{"x", xs[j]},
                                {"t", t},
                                {"divisor", divisor_json(g.divisors[j])},
                                {"alpha", character_json(g.alphas[j])},
                                {"V_chi", g.V_chi[j]}});
            }
            row.seed = g.divisors.front();
        } catch (const InversionError& err) {
            failure = err.what();
            break;
        }
    }
    std::ofstream(out / "potential.csv") << csv;
    json meta = {{"config_hash", config_hash(c)},
                 {"k", f.k},
                 {"alpha0", character_json(f.alpha0)},
                 {"eta", f.eta},
                 {"eta_k", f.eta_k},
                 {"time_sign", go.time_sign},
                 {"partial", !failure.empty()},
                 {"error", failure},
                 {"trajectory", traj}};
    write_json(out / "potential.json", meta);
    if (!failure.empty()) {
        fmt::print(stderr, "potential: {}\n", failure);
        return kNumerical;
    }
    fmt::print("potential: {} x {} lattice written\n", xs.size(), ts.size());
    return kPass;
}

int run_verify(const RunConfig& c, const fs::path& out) {
    auto recs = run_battery(c);
    json checks = json::array();
    bool all = true;
    for (const auto& r : recs) {
        all = all && r.pass;
        checks.push_back({{"name", r.name},
                          {"anchor", r.anchor},
                          {"criterion", r.criterion},
                          {"residual", r.residual},
                          {"tolerance", r.tolerance},
                          {"pass", r.pass},
                          {"detail", r.detail}});
        fmt::print("{} {:<20} {:>10.3e} (tol {:.1e})  {}\n", r.pass ? "PASS" : "FAIL", r.name, r.residual,
                   r.tolerance, r.anchor);
    }
    write_json(out / "verify.json",
               {{"config_hash", config_hash(c)}, {"environment", environment_json()}, {"pass", all}, {"checks", checks}});
    return all ? kPass : kVerification;
}

int run_converge(const RunConfig& c, const fs::path& out) {
    auto s = truncation_study(6, c.quad);
    json gaps = json::array();
    for (const auto& [a, b] : s.gaps) gaps.push_back({a, b});
    write_json(out / "converge.json",
               {{"gaps", gaps}, {"differences", s.differences}, {"ratios", s.ratios}, {"pass", s.pass}});
    fmt::print("converge: differences [{:.3e}] ratios [{:.3f}]\n", fmt::join(s.differences, ", "),
               fmt::join(s.ratios, ", "));
    return s.pass ? kPass : kVerification;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-gap spectral data and KdV flows"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    std::optional<double> tol;
    std::optional<unsigned> seed;
    std::optional<int> k;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--tol", tol, "quadrature tolerance");
    app.add_option("--seed", seed, "seed for sampled checks");
    app.add_option("--k", k, "hierarchy order");
    auto* geo = app.add_subcommand("geometry", "critical points, frequencies and entropy");
    auto* pot = app.add_subcommand("potential", "V(x, t) on the configured lattice");
    auto* ver = app.add_subcommand("verify", "run the check battery");
    auto* con = app.add_subcommand("converge", "truncation study over nested band sets");
    for (auto* s : {geo, pot, ver, con}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kPass : kValidation;
    }

    try {
        RunConfig c = config_path.empty() ? parse_config(json::object()) : load_config(config_path);
        if (tol) c.quad.tol = *tol;
        if (seed) c.seed = *seed;
        if (k) c.k = *k;
        if (!out_dir.empty()) c.out = out_dir;
        c = parse_config(to_json(c));
        fs::path out(c.out);
        fs::create_directories(out);
        if (*geo) return run_geometry(c, out);
        if (*pot) return run_potential(c, out);
        if (*ver) return run_verify(c, out);
        return run_converge(c, out);
    } catch (const ValidationError& e) {
        fmt::print(stderr, "validation error: {}\n", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return kNumerical;
    }
}
