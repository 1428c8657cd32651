// Acceptance run: one PASS/FAIL line per criterion, tolerances pinned here independently of the
// battery defaults. Exit status is nonzero if any criterion fails.
#include "battery.hpp"
#include "config.hpp"

#include "fgap/abelian.hpp"

#include <boost/math/special_functions/ellint_rf.hpp>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <map>

using namespace fgap;
using namespace fgap::app;
using nlohmann::json;

namespace {

enum class Rule { Below, Exact, Order, Flag };

struct Requirement {
    std::string config;
    std::string check;
    Rule rule;
    double tol = 0.0;
};

struct Criterion {
    int id;
    std::string title;
    std::vector<Requirement> req;
};

const char* kFree = R"({"gaps": []})";
const char* kOne = R"({"gaps": [[1, 2]], "divisor": [[1.3, 1]], "k": 1})";
const char* kTwo = R"({"gaps": [[1, 2], [3, 3.7]], "divisor": [[1.3, 1], [3.4, -1]], "k": 1})";
const char* kThree = R"({"gaps": [[0.5, 1], [2, 2.6], [4, 4.3]], "k": 1})";

// Second-order convergence: |p - 2| <= 0.2 for every measured order.
constexpr double kOrderBand = 0.2;

std::vector<Criterion> criteria() {
    using R = Rule;
    return {
        {1, "free case exact: V = 0 on 32 x 32, m_+(-1) = -1, Theta(-1) = i",
         {{"N0", "free_potential", R::Below, 1e-10}, {"N0", "free_m_plus", R::Below, 1e-12},
          {"N0", "free_theta", R::Below, 1e-12}}},
        {2, "gap conditions of dTheta^(k), k = 0, 1, and d log Phi for N = 1, 2, 3",
         {{"N1", "gap_conditions", R::Below, 1e-10}, {"N2", "gap_conditions", R::Below, 1e-10},
          {"N3", "gap_conditions", R::Below, 1e-10}}},
        {3, "harmonic measure: total 1, strictly decreasing, N = 1 elliptic Dirichlet oracle",
         {{"N1", "harmonic_total", R::Below, 1e-10}, {"N2", "harmonic_total", R::Below, 1e-10},
          {"N3", "harmonic_total", R::Below, 1e-10}, {"N1", "harmonic_monotone", R::Flag},
          {"N2", "harmonic_monotone", R::Flag}, {"N3", "harmonic_monotone", R::Flag},
          {"N1", "dirichlet_oracle", R::Below, 1e-6}}},
        {4, "Abel round trip on 50 random divisors for N = 1, 2, 3",
         {{"N1", "abel_round_trip", R::Below, 1e-8}, {"N2", "abel_round_trip", R::Below, 1e-8},
          {"N3", "abel_round_trip", R::Below, 1e-8}}},
        {5, "Wronskian identity at 20 upper half-plane points, N = 1, 2",
         {{"N1", "wronskian", R::Below, 1e-8}, {"N2", "wronskian", R::Below, 1e-8}}},
        {6, "m_+ route agreement and m_+ + m_- = -1/R",
         {{"N1", "m_route", R::Below, 1e-8}, {"N2", "m_route", R::Below, 1e-8},
          {"N1", "resolvent_sum", R::Below, 1e-9}, {"N2", "resolvent_sum", R::Below, 1e-9}}},
        {7, "reflectionless and pseudocontinuation boundary values on 10 band samples",
         {{"N1", "reflectionless", R::Below, 1e-4}, {"N2", "reflectionless", R::Below, 1e-4},
          {"N1", "pseudocontinuation", R::Below, 1e-4}, {"N2", "pseudocontinuation", R::Below, 1e-4}}},
        {8, "Fourier integral identity for x in {0.1, 0.5, 1.0}, N = 1", {{"N1", "fourier", R::Below, 1e-6}}},
        {9, "chi_1 three-way agreement and second-order Riccati consistency",
         {{"N1", "chi1_three_way", R::Below, 1e-6}, {"N2", "chi1_three_way", R::Below, 1e-6},
          {"N1", "riccati", R::Order, kOrderBand}, {"N2", "riccati", R::Order, kOrderBand}}},
        {10, "KdV_1 residual: order in [1.8, 2.2] for N = 1, exactly 0 for N = 0",
         {{"N1", "kdv_order", R::Order, kOrderBand}, {"N0", "kdv_order", R::Exact}}},
        {11, "structural identity at k = 1 (second order in t) and B_n from A_n",
         {{"N1", "structural_identity", R::Order, kOrderBand}, {"N1", "b_from_a", R::Below, 1e-5},
          {"N2", "structural_identity", R::Order, kOrderBand}, {"N2", "b_from_a", R::Below, 1e-5}}},
        {12, "B-periods of dTheta^(1) for N = 1, 2",
         {{"N1", "b_period", R::Below, 1e-6}, {"N2", "b_period", R::Below, 1e-6}}},
        {13, "Blaschke limit to 1e-3 relative and monotone decay of Theta^(k) - lambda^(k+1/2)",
         {{"N1", "blaschke_limit", R::Below, 1e-3}, {"N2", "blaschke_limit", R::Below, 1e-3},
          {"N1", "power_defect_decay", R::Flag}, {"N2", "power_defect_decay", R::Flag}}},
        {14, "Widom-Martin sum equals the entropy integral, N = 2", {{"N2", "entropy", R::Below, 1e-6}}},
        {15, "nested truncations with gap widths 4^-j: successive differences shrink",
         {{"N1", "truncation", R::Flag}, {"N1", "truncation", R::Below, 1.0}}},
    };
}

// int_y^x dt / sqrt(prod (p_i + q_i t)), all factors positive on (y, x), by Carlson's R_F reduction.
double cubic_elliptic(const double p[3], const double q[3], double y, double x) {
    double X[3], Y[3];
    for (int i = 0; i < 3; ++i) {
        X[i] = std::sqrt(p[i] + q[i] * x);
        Y[i] = std::sqrt(p[i] + q[i] * y);
    }
    auto u = [&](int i, int j, int k) { return (X[i] * X[j] * Y[k] + Y[i] * Y[j] * X[k]) / (x - y); };
    const double u12 = u(0, 1, 2), u13 = u(0, 2, 1), u23 = u(1, 2, 0);
    return 2.0 * boost::math::ellint_rf(u12 * u12, u13 * u13, u23 * u23);
}

CheckRecord dirichlet_oracle_record(const RunConfig& c) {
    const double pl[3] = {0.0, 1.0, 2.0}, ql[3] = {-1.0, -1.0, -1.0};
    const double pg[3] = {0.0, -1.0, 2.0}, qg[3] = {1.0, 1.0, -1.0};
    const double oracle = cubic_elliptic(pl, ql, -1.0, 0.0) / cubic_elliptic(pg, qg, 1.0, 2.0);
    const double got = harmonic_measures(c.bands(), -1.0, c.quad).at(0);
    return {"dirichlet_oracle", "harmonic measure of [2, inf) at -1 against an elliptic-integral solution", 3,
            std::abs(got - oracle), 1e-6, true, fmt::format("omega {:.15g} oracle {:.15g}", got, oracle)};
}

bool judge(const Requirement& q, const CheckRecord& r) {
    if (!std::isfinite(r.residual)) return false;
    switch (q.rule) {
    case Rule::Below:
        return r.residual < q.tol;
    case Rule::Exact:
        return r.residual == 0.0;
    case Rule::Order:
        return r.residual <= q.tol;
    case Rule::Flag:
    default:
        return r.pass;
    }
}

} // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    const std::map<std::string, const char*> configs{{"N0", kFree}, {"N1", kOne}, {"N2", kTwo}, {"N3", kThree}};
    const auto crit = criteria();

    std::map<std::string, std::set<std::string>> wanted;
    for (const auto& c : crit)
        for (const auto& q : c.req) wanted[q.config].insert(q.check);

    std::map<std::pair<std::string, std::string>, CheckRecord> rec;
    for (const auto& [tag, names] : wanted) {
        RunConfig cfg = parse_config(json::parse(configs.at(tag)));
        for (auto& r : run_battery(cfg, names)) rec[{tag, r.name}] = r;
        if (names.contains("dirichlet_oracle")) rec[{tag, "dirichlet_oracle"}] = dirichlet_oracle_record(cfg);
    }

    int failed = 0;
    for (const auto& c : crit) {
        bool ok = true;
        std::string worst;
        for (const auto& q : c.req) {
            auto it = rec.find({q.config, q.check});
            if (it == rec.end()) {
                ok = false;
                worst += fmt::format(" [{} {}: missing]", q.config, q.check);
                continue;
            }
            const bool pass = judge(q, it->second);
            ok = ok && pass;
            if (!pass) worst += fmt::format(" [{} {}: {:.3e} {}]", q.config, q.check, it->second.residual, it->second.detail);
        }
        failed += !ok;
        fmt::print("{} criterion {:>2}: {}{}\n", ok ? "PASS" : "FAIL", c.id, c.title, worst);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("{} of {} criteria passed in {:.1f} s\n", crit.size() - failed, crit.size(), secs);
    return failed == 0 ? 0 : 1;
}
