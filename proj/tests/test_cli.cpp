#include "battery.hpp"
#include "config.hpp"

#include "fgap/errors.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <set>

using namespace fgap;
using namespace fgap::app;
using nlohmann::json;

TEST_CASE("config defaults and round trip", "[cli]") {
    auto c = parse_config(json::object());
    CHECK(c.gaps == std::vector<std::pair<double, double>>{{1.0, 2.0}});
    CHECK(c.k == 1);
    CHECK(c.k_cap == 3);
    auto d = c.divisor_for(c.bands());
    CHECK(d[0].lambda == 1.3);
    CHECK(d[0].eps == 1);

    auto again = parse_config(to_json(c));
    CHECK(config_hash(again) == config_hash(c));
    CHECK(config_hash(c).size() == 16);

    auto j = to_json(c);
    j["seed"] = 2;
    CHECK(config_hash(parse_config(j)) != config_hash(c));

    auto l = parse_config(json::parse(R"({"lattice": {"x": {"min": 0, "max": 1, "count": 5}}})"));
    CHECK(l.x.points() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("config validation", "[cli]") {
    CHECK_THROWS_AS(parse_config(json::parse(R"({"gaps": [[1, 2], [1.5, 3]]})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"version": 2})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"k": 4})")), ValidationError);
    CHECK_NOTHROW(parse_config(json::parse(R"({"k": 4, "k_cap": 4})")));
    CHECK_THROWS_AS(parse_config(json::parse(R"({"gaps": [[1, 2, 3]]})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"divisor": [[2.5, 1]]})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"quad": {"tol": 0}})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::parse(R"({"gaps": "wide"})")), ValidationError);
    CHECK_THROWS_AS(parse_config(json::array()), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("free battery is exact", "[cli]") {
    RunConfig c = parse_config(json::parse(R"({"gaps": []})"));
    for (const auto& r : run_battery(c)) {
        INFO(r.name << " residual " << r.residual);
        CHECK(r.pass);
        // The truncation study runs on its own nested band sets and reports a ratio.
        if (r.name != "truncation") CHECK(r.residual < 1e-10);
    }
}

TEST_CASE("one-gap battery", "[cli]") {
    auto recs = run_battery(parse_config(json::object()));
    CHECK(recs.size() >= 12);
    std::set<std::string> names;
    std::set<int> criteria;
    for (const auto& r : recs) {
        INFO(r.name << " residual " << r.residual << " detail " << r.detail);
        CHECK(r.pass);
        CHECK_FALSE(r.anchor.empty());
        names.insert(r.name);
        criteria.insert(r.criterion);
    }
    CHECK(names.size() == recs.size());
    for (int k = 1; k <= 15; ++k) CHECK(criteria.count(k) == 1);
    CHECK(battery_names().size() == recs.size());
}

TEST_CASE("loosened quadrature breaks the Wronskian check", "[cli]") {
    auto c = parse_config(json::parse(R"({"quad": {"tol": 1e-3}})"));
    auto recs = run_battery(c, {"wronskian"});
    REQUIRE(recs.size() == 1);
    CHECK_FALSE(recs[0].pass);
}

TEST_CASE("per-check tolerance overrides", "[cli]") {
    auto c = parse_config(json::parse(R"({"tolerances": {"free_theta": 1e-20}})"));
    auto recs = run_battery(c, {"free_theta"});
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].tolerance == 1e-20);
}
