#include "support.hpp"

#include "fgap/kdv.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

using namespace fgap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const cplx I(0.0, 1.0);

FlowState flow_for(const SpectralContext& ctx, const Divisor& d, int k = 1) {
    return make_flow(ctx.abel, ctx.theta0, ThetaK::build(ctx.bands, k, ctx.quad), d);
}

void check_orders(const FlowCheck& c) {
    for (double p : c.order) CHECK_THAT(p, WithinAbs(2.0, 0.2));
}

} // namespace

TEST_CASE("closed-form chi coefficients", "[kdv]") {
    auto e = testing::one_gap();
    auto mid = chi_closed_form(e, make_divisor(e, {{1.5, 1}}), 1);
    CHECK_THAT(mid.tau[0], WithinAbs(0.0, 1e-15));
    CHECK(std::abs(mid.chi[1]) < 1e-15);

    auto c = chi_closed_form(e, make_divisor(e, {{1.2, -1}}), 1);
    CHECK_THAT((-2.0 * c.chi[1]).real(), WithinAbs(0.6, 1e-14));
    CHECK_THAT(c.chi[1].real(), WithinAbs(-c.tau[0], 1e-15));
    CHECK(c.chi[0].real() == 0.0);
    CHECK_THAT(c.chi[0].imag(), WithinAbs(m_plus_at_zero(e, make_divisor(e, {{1.2, -1}})), 1e-15));
    REQUIRE(c.chi.size() == 3);
    for (auto s : c.source) CHECK(s == ChiSource::ClosedForm);
}

TEST_CASE("asymptotic oracle", "[kdv]") {
    auto z = chi_asymptotic_oracle(BandSet{}, Divisor{}, 4);
    for (cplx x : z.chi) CHECK(x == cplx(0.0, 0.0));

    std::mt19937 rng(17);
    for (const auto& e : {testing::one_gap(), testing::two_gap()}) {
        for (int i = 0; i < 5; ++i) {
            auto d = testing::random_divisor(e, rng);
            auto o = chi_asymptotic_oracle(e, d, 3);
            auto c = chi_closed_form(e, d, 2);
            const auto sg = sigma_weights(e, d);
            double m0 = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) m0 += 0.5 * sg[j] * d[j].eps;
            CHECK(std::abs(o.chi[0] - I * m0) < 1e-8);
            // Trace formula: V(0) = -2 chi_1.
            double v0 = 0.0;
            for (std::size_t j = 0; j < d.size(); ++j) v0 += e.gap(j).a + e.gap(j).b - 2.0 * d[j].lambda;
            CHECK_THAT((-2.0 * o.chi[1]).real(), WithinAbs(v0, 1e-8));
            for (int n = 0; n <= 3; ++n) CHECK(std::abs(o.chi[n] - c.chi[n]) < 1e-7);
        }
    }
}

TEST_CASE("even coefficients carry the sheet signs", "[kdv]") {
    STATIC_REQUIRE(ChiConvention::even_terms_carry_eps);
    auto e = testing::two_gap();
    auto d = make_divisor(e, {{1.3, 1}, {3.4, -1}});
    auto o = chi_asymptotic_oracle(e, d, 2);
    auto sg = sigma_weights(e, d);
    cplx with_eps = 0.0, without = 0.0;
    for (std::size_t j = 0; j < 2; ++j) {
        with_eps += 0.5 * I * sg[j] * static_cast<double>(d[j].eps) * d[j].lambda;
        without += 0.5 * I * sg[j] * d[j].lambda;
    }
    CHECK(std::abs(o.chi[2] - with_eps) < 1e-8);
    CHECK(std::abs(o.chi[2] - without) > 1e-2);
    // Frozen oracle values for this divisor.
    CHECK_THAT(o.chi[0].imag(), WithinAbs(0.222604333904392, 1e-10));
    CHECK_THAT(o.chi[1].real(), WithinAbs(-0.15, 1e-10));
    CHECK_THAT(o.chi[2].imag(), WithinAbs(-0.0549807918344213, 1e-10));
}

TEST_CASE("hierarchy coefficients", "[kdv]") {
    ChiCoefficients zero{4, std::vector<cplx>(5, 0.0), {}, {}};
    auto ab = ab_coefficients(zero, 2);
    CHECK(ab.A == std::vector<cplx>{1.0, 0.0, 0.0});
    for (cplx b : ab.B) CHECK(b == cplx(0.0));
    CHECK(std::abs(ab.a_poly(cplx(0.3, 2.0)) - std::pow(cplx(0.3, 2.0), 2)) < 1e-15);

    ChiCoefficients one{2, {cplx(0, 0.4), cplx(0.7, 0), cplx(0, -0.2)}, {}, {}};
    auto ab1 = ab_coefficients(one, 1);
    CHECK(ab1.A[1] == -one.chi[1]);
    CHECK(ab1.B[0] == one.chi[0]);
    CHECK_THAT((2.0 * ab1.A[1]).real(), WithinAbs((-2.0 * one.chi[1]).real(), 1e-15));

    // Dense-solve oracle on random order-2 data.
    std::mt19937 rng(8);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 5; ++trial) {
        const int k = 2;
        std::vector<cplx> chi(2 * k + 1);
        for (auto& c : chi) c = cplx(g(rng), g(rng));
        Eigen::MatrixXcd co = Eigen::MatrixXcd::Zero(k + 1, k + 1), ce = co;
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= i; ++j) {
                co(i, j) = i == j ? cplx(1.0) : chi[2 * (i - j) - 1];
                ce(i, j) = chi[2 * (i - j)];
            }
        Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(k + 1);
        rhs(0) = 1.0;
        Eigen::VectorXcd a = co.fullPivLu().solve(rhs);
        Eigen::VectorXcd b = ce * a;
        auto r = ab_coefficients(ChiCoefficients{2 * k, chi, {}, {}}, k);
        for (int n = 0; n <= k; ++n) {
            CHECK(std::abs(r.A[n] - a(n)) < 1e-13);
            CHECK(std::abs(r.B[n] - b(n)) < 1e-13);
        }
        CHECK((r.chi_o * Eigen::Map<const Eigen::VectorXcd>(r.A.data(), k + 1) - rhs).norm() < 1e-12);
    }
}

TEST_CASE("derivative identities along the flow", "[kdv]") {
    auto ctx0 = SpectralContext::build(BandSet{});
    auto f0 = flow_for(*ctx0, Divisor{});
    CHECK(b_from_a_identity_check(*ctx0, f0, 1).max_residual() == 0.0);

    auto e = testing::one_gap();
    auto ctx = SpectralContext::build(e);
    auto f = flow_for(*ctx, make_divisor(e, {{1.3, 1}}));

    auto ba = b_from_a_identity_check(*ctx, f, 1);
    check_orders(ba);
    CHECK(ba.extrapolated < 1e-5);

    auto chi = chi1_three_way(*ctx, f);
    CHECK(chi.max_relative < 1e-6);
    CHECK_THAT(chi.from_moments, WithinRel(chi.from_trace, 1e-12));

    check_orders(riccati_check(*ctx, f));

    auto th1 = ThetaK::build(e, 1);
    auto lams = sample_upper(e, 5, 1);
    auto si = structural_identity_check(ctx, th1, f, lams);
    check_orders(si);
    CHECK(si.extrapolated < 1e-6);
}

TEST_CASE("potential lattice", "[kdv]") {
    auto ctx0 = SpectralContext::build(BandSet{});
    auto g0 = potential_grid(*ctx0, flow_for(*ctx0, Divisor{}), {0.0, 1.0, 2.0}, {0.0, 0.5});
    for (double v : g0.V) CHECK(v == 0.0);

    auto e = testing::one_gap();
    auto ctx = SpectralContext::build(e);
    auto f = flow_for(*ctx, make_divisor(e, {{1.3, 1}}));
    std::vector<double> xs;
    for (int i = 0; i <= 40; ++i) xs.push_back(0.05 * i);
    auto g = potential_grid(*ctx, f, xs, {0.0});
    REQUIRE(g.V.size() == xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) {
        CHECK(std::abs(g.V[j]) <= e.gap(0).width());
        CHECK_THAT(g.V[j], WithinAbs(g.V_chi[j], 1e-9));
        CHECK(g.divisors[j][0].lambda >= e.gap(0).a);
        CHECK(g.divisors[j][0].lambda <= e.gap(0).b);
    }
    // Smooth: second differences scale with the step squared.
    for (std::size_t j = 1; j + 1 < xs.size(); ++j) CHECK(std::abs(g.V[j + 1] - 2.0 * g.V[j] + g.V[j - 1]) < 0.05);

    // One full turn of the gap circle takes 1/eta in x.
    const double period = 1.0 / std::abs(f.eta[0]);
    auto p = potential_grid(*ctx, f, {0.3, 0.3 + period}, {0.0});
    CHECK_THAT(p.V[1], WithinAbs(p.V[0], 1e-8));

    // Time reversal is a shift of the initial character.
    const double t = 0.2;
    GridOptions o;
    auto back = potential_grid(*ctx, f, {0.0, 0.4}, {-t}, o);
    auto shifted = f;
    shifted.alpha0 = flow_character(f, 0.0, o.time_sign * -t);
    auto fwd = potential_grid(*ctx, shifted, {0.0, 0.4}, {0.0}, o);
    for (std::size_t j = 0; j < 2; ++j) CHECK_THAT(back.V[j], WithinAbs(fwd.V[j], 1e-9));
}

TEST_CASE("KdV residual", "[kdv]") {
    auto ctx0 = SpectralContext::build(BandSet{});
    auto c0 = kdv_convergence(*ctx0, flow_for(*ctx0, Divisor{}), 0.0, 0.0, 1.0, 9);
    for (double r : c0.residual) CHECK(r == 0.0);

    auto e = testing::one_gap();
    auto ctx = SpectralContext::build(e);
    auto f = flow_for(*ctx, make_divisor(e, {{1.3, 1}}));
    CHECK_THROWS_AS(kdv_residual(potential_grid(*ctx, f, {0.0, 0.1, 0.2}, {0.0, 0.1, 0.2})), ValidationError);

    auto c = kdv_convergence(*ctx, f, 0.0, 0.0, 1.0, 9);
    REQUIRE(c.order.size() == 2);
    for (double p : c.order) {
        CHECK(p >= 1.8);
        CHECK(p <= 2.2);
    }
}

TEST_CASE("boundedness of the even coefficients", "[kdv]") {
    auto e = testing::two_gap();
    const double split = chi_bound_split(e);
    std::mt19937 rng(23);
    for (int i = 0; i < 100; ++i) {
        auto b = chi_even_bound(e, testing::random_divisor(e, rng), 1, split);
        CHECK(b.value <= b.bound);
    }
}

TEST_CASE("empirical orders", "[kdv]") {
    std::vector<double> r{1.0, 0.25, 0.0625};
    auto p = empirical_orders(r);
    REQUIRE(p.size() == 2);
    for (double x : p) CHECK_THAT(x, WithinAbs(2.0, 1e-14));
}
