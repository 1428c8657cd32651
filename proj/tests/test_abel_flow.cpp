#include "support.hpp"

#include "fgap/abel_flow.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

using namespace fgap;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double chart_gap(double p, double q) {
    double d = std::fmod(std::abs(p - q), two_pi);
    return std::min(d, two_pi - d);
}

void check_same_divisor(const Divisor& a, const Divisor& b, double tol) {
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        CHECK_THAT(a[j].lambda, WithinAbs(b[j].lambda, tol));
        CHECK(a[j].eps == b[j].eps);
    }
}

} // namespace

TEST_CASE("Abel map basics", "[abel_flow]") {
    auto a0 = AbelMap::build(BandSet{});
    CHECK(a0(Divisor{}).size() == 0);

    for (const auto& e : {testing::one_gap(), testing::two_gap(), testing::three_gap()}) {
        auto am = AbelMap::build(e);
        CHECK(torus_distance(am(am.critical_divisor()), CharacterVector(e.size())) < 1e-14);
        for (std::size_t j = 0; j < e.size(); ++j) {
            CHECK(am.critical_divisor()[j].eps == -1);
            CHECK(e.gap(j).contains(am.critical_divisor()[j].lambda));
        }
    }

    auto e = testing::two_gap();
    auto am = AbelMap::build(e);
    std::mt19937 rng(11);
    for (int i = 0; i < 5; ++i) {
        auto d = testing::random_divisor(e, rng);
        CHECK(torus_distance(am.raw(reflect_divisor(e, d)), -am.raw(d)) < 1e-13);
    }
}

TEST_CASE("Jacobi inversion round trip", "[abel_flow]") {
    std::mt19937 rng(5);
    for (const auto& e : {testing::one_gap(), testing::two_gap(), testing::three_gap()}) {
        auto am = AbelMap::build(e);
        check_same_divisor(am.invert(CharacterVector(e.size())), am.critical_divisor(), 1e-10);
        for (int i = 0; i < 6; ++i) {
            auto d = testing::random_divisor(e, rng);
            InversionReport rep;
            auto back = am.invert(am(d), am.critical_divisor(), {}, &rep);
            check_same_divisor(back, d, 1e-8);
            CHECK(rep.residual < 1e-10);
        }
    }
}

TEST_CASE("inversion sweeps the gap circle continuously", "[abel_flow]") {
    auto e = testing::one_gap();
    auto am = AbelMap::build(e);
    // Forward tabulation over the chart circle, then inversion seeded from the previous point.
    const int n = 48;
    Divisor seed = am.critical_divisor();
    double prev = divisor_chart(e, seed).phi[0];
    for (int i = 0; i <= n; ++i) {
        const double phi = two_pi * (i + 0.5) / (n + 1);
        auto d = chart_to_divisor(e, {{phi}});
        auto got = am.invert(am(d), seed);
        const double g = divisor_chart(e, got).phi[0];
        CHECK(chart_gap(g, phi) < 1e-8);
        if (i > 0) CHECK(chart_gap(g, prev) < 2.0 * two_pi / (n + 1));
        prev = g;
        seed = got;
    }
}

TEST_CASE("inversion is continuous in the target", "[abel_flow]") {
    auto e = testing::two_gap();
    auto am = AbelMap::build(e);
    std::mt19937 rng(2);
    for (int i = 0; i < 3; ++i) {
        auto d = testing::random_divisor(e, rng);
        auto a = am(d);
        auto b = a + CharacterVector(std::vector<double>{1e-6, -1e-6});
        auto pa = divisor_chart(e, am.invert(a, d)).phi;
        auto pb = divisor_chart(e, am.invert(b, d)).phi;
        for (std::size_t j = 0; j < pa.size(); ++j) CHECK(chart_gap(pa[j], pb[j]) < 1e-4);
    }
}

TEST_CASE("linear flow on the torus", "[abel_flow]") {
    BandSet e0;
    auto f0 = make_flow(AbelMap::build(e0), ThetaK::build(e0, 0), ThetaK::build(e0, 1), Divisor{});
    CHECK(flow_character(f0, 3.0, -2.0).size() == 0);

    auto e = testing::two_gap();
    auto am = AbelMap::build(e);
    auto f = make_flow(am, ThetaK::build(e, 0), ThetaK::build(e, 1), make_divisor(e, {{1.3, 1}, {3.4, -1}}));
    CHECK(torus_distance(flow_character(f, 0.0, 0.0), f.alpha0) == 0.0);

    const double x1 = 0.37, x2 = 5.25, t = 0.8;
    auto g = f;
    g.alpha0 = flow_character(f, x1, 0.0);
    CHECK(torus_distance(flow_character(f, x1 + x2, t), flow_character(g, x2, t)) < 1e-14);

    // Long runs stay on the torus.
    auto far = flow_character(f, 1e4, 0.0);
    for (double c : far.components()) {
        CHECK(c >= 0.0);
        CHECK(c < 1.0);
    }
    std::vector<double> expect;
    for (std::size_t j = 0; j < 2; ++j) expect.push_back(f.alpha0[j] - f.eta[j] * 1e4);
    CHECK(torus_distance(far, CharacterVector(expect)) < 1e-10);
}
