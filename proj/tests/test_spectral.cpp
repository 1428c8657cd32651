#include "support.hpp"

#include "fgap/spectral.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>

using namespace fgap;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const cplx I(0.0, 1.0);

// sigma_k from its product formula in 50-digit arithmetic.
std::vector<double> sigma_oracle(const BandSet& e, const Divisor& d) {
    using W = boost::multiprecision::cpp_bin_float_50;
    std::vector<double> out;
    for (std::size_t k = 0; k < d.size(); ++k) {
        W l = d[k].lambda, a = e.gap(k).a, b = e.gap(k).b;
        W s = 2 * sqrt((l - a) * (b - l)) / sqrt(l);
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j == k) continue;
            W aj = e.gap(j).a, bj = e.gap(j).b, lj = d[j].lambda;
            s *= sqrt((1 - aj / l) * (1 - bj / l)) / (1 - lj / l);
        }
        out.push_back(static_cast<double>(abs(s)));
    }
    return out;
}

std::shared_ptr<const SpectralContext> ctx_for(const BandSet& e) { return SpectralContext::build(e); }

} // namespace

TEST_CASE("sigma weights", "[spectral]") {
    auto e = testing::one_gap();
    CHECK_THAT(sigma_weights(e, make_divisor(e, {{1.5, 1}}))[0], WithinAbs(2.0 * 0.5 / std::sqrt(1.5), 1e-15));
    CHECK_THAT(sigma_weights(e, make_divisor(e, {{1.5, 1}}))[0], WithinAbs(0.816497, 1e-6));
    CHECK(sigma_weights(e, make_divisor(e, {{1.0, 1}}))[0] == 0.0);
    CHECK(sigma_weights(e, make_divisor(e, {{2.0, 1}}))[0] == 0.0);

    std::mt19937 rng(9);
    auto e2 = testing::two_gap();
    for (int i = 0; i < 10; ++i) {
        auto d = testing::random_divisor(e2, rng);
        auto s = sigma_weights(e2, d);
        auto o = sigma_oracle(e2, d);
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(s[j] >= 0.0);
            CHECK_THAT(s[j], WithinRel(o[j], 1e-14));
        }
    }
}

TEST_CASE("diagonal resolvent", "[spectral]") {
    BandSet e0;
    CHECK(std::abs(resolvent_R(-1.0, e0, Divisor{}) - 0.5) < 1e-15);

    auto e = testing::two_gap();
    auto d = make_divisor(e, {{1.3, 1}, {3.4, -1}});
    for (double xi : {0.4, 2.5, 5.0, 12.0}) CHECK(std::abs(resolvent_R(xi, e, d).real()) < 1e-14);

    // 2 sqrt(lambda) R / i = 1 + V(0) / (2 lambda) + ...
    const double v0 = 1.0 + 2.0 - 2.6 + 3.0 + 3.7 - 6.8;
    std::vector<double> h, v, w;
    for (int m = 2; m <= 6; ++m) {
        const double lam = -std::pow(10.0, m);
        const cplx sq = half_power(lam, 0);
        const cplx r = resolvent_R(lam, e, d);
        h.push_back(1.0 / -lam);
        v.push_back((2.0 * sq * r / I).real());
        w.push_back((4.0 * sq * lam * (r - I / (2.0 * sq)) / I).real());
    }
    CHECK_THAT(richardson_limit<double>(h, v, 1.0).value, WithinAbs(1.0, 1e-12));
    CHECK_THAT(richardson_limit<double>(h, w, 1.0).value, WithinAbs(v0, 1e-6));
}

TEST_CASE("Weyl functions", "[spectral]") {
    BandSet e0;
    CHECK(std::abs(m_plus(-1.0, e0, Divisor{}) - (-1.0)) < 1e-15);

    auto e = testing::one_gap();
    auto d = make_divisor(e, {{1.3, -1}});
    // The pole sits on exactly one sheet; on the other the singularity is removable.
    int poles = 0;
    for (int eps : {1, -1}) {
        auto de = make_divisor(e, {{1.3, eps}});
        bool pole = false;
        try {
            (void)m_plus(1.3, e, de);
        } catch (const NumericalError&) {
            pole = true;
        }
        poles += pole;
        const double near = std::abs(m_plus(cplx(1.3, 1e-7), e, de));
        CHECK((pole ? near > 1e5 : near < 1e2));
    }
    CHECK(poles == 1);
    for (cplx z : sample_upper(e, 10, 4)) {
        CHECK(m_plus(z, e, d).imag() > 0.0);
        cplx lhs = m_plus(z, e, d) + m_minus(z, e, d);
        CHECK(std::abs(lhs + 1.0 / resolvent_R(z, e, d)) < 1e-9 * std::abs(lhs));
    }
    // Increasing on the negative half-line.
    double prev = m_plus(-50.0, e, d).real();
    for (double x = -40.0; x < 0.0; x += 5.0) {
        double cur = m_plus(x, e, d).real();
        CHECK(cur > prev);
        prev = cur;
    }
    // m_+(mu^2) - i mu -> 0 along mu = i y.
    std::vector<double> h, v;
    for (int m = 1; m <= 5; ++m) {
        const double y = std::pow(10.0, m);
        h.push_back(1.0 / y);
        v.push_back(std::abs(m_plus(-y * y, e, d) - I * cplx(0.0, y)));
    }
    for (std::size_t i = 0; i + 1 < v.size(); ++i) CHECK(v[i + 1] < v[i]);
    CHECK(std::abs(richardson_limit<double>(h, v, 1.0).value) < 1e-6);
}

TEST_CASE("canonical products", "[spectral]") {
    BandSet e0;
    CHECK(std::abs(e_function(cplx(-2, 1), e0, Divisor{}) - 1.0) < 1e-15);

    auto e = testing::two_gap();
    auto ctx = ctx_for(e);
    auto dc = ctx->abel.critical_divisor();
    CHECK(std::abs(CanonicalProduct::build(ctx, dc)(-1.0) - 1.0) < 1e-10);

    // Direct product at lambda = -1, where every factor is real and positive.
    auto d = make_divisor(e, {{1.3, 1}, {3.4, -1}});
    const double lam = -1.0;
    double inner = 1.0, outer = 1.0;
    for (std::size_t j = 0; j < 2; ++j) {
        const double lj = d[j].lambda, cj = ctx->abel.critical_points()[j];
        const double pl = GreenPole::build(e, lj).phi(lam).real();
        const double pc = GreenPole::build(e, cj).phi(lam).real();
        inner *= (1.0 - lj / lam) * pc / ((1.0 - cj / lam) * pl);
        if (d[j].eps > 0) outer *= pl;
    }
    cplx got = CanonicalProduct::build(ctx, d)(lam);
    CHECK_THAT(got.real(), WithinRel(std::sqrt(inner) * outer, 1e-10));
    CHECK_THAT(got.imag(), WithinAbs(0.0, 1e-12));

    // e times its reflection tends to 1 at -infinity.
    auto p = CanonicalProduct::build(ctx, d);
    std::vector<double> h, v;
    for (int m = 1; m <= 5; ++m) {
        auto [a, b] = p.pair(-std::pow(10.0, m));
        h.push_back(std::pow(10.0, -m / 2.0));
        v.push_back(std::abs(a * b - 1.0));
    }
    CHECK(richardson_limit<double>(h, v, 1.0).value < 1e-6);
}

TEST_CASE("reproducing kernel", "[spectral]") {
    auto b0 = SpectralBundle::build(ctx_for(BandSet{}), Divisor{});
    for (cplx z : {cplx(-1, 0.5), cplx(2, 1)}) {
        for (cplx z0 : {cplx(0.5, 0.3), cplx(-3, 2)}) {
            cplx w = half_power(z, 0), w0 = half_power(z0, 0);
            CHECK(std::abs(kernel_k_alpha(b0, z, z0) - I / (w - std::conj(w0))) < 1e-10);
        }
    }

    auto e = testing::two_gap();
    auto b = SpectralBundle::build(ctx_for(e), make_divisor(e, {{1.3, 1}, {3.4, -1}}));
    auto pts = sample_upper(e, 10, 3);
    for (cplx z : pts) {
        cplx kd = kernel_k_alpha(b, z, z);
        CHECK(kd.real() > 0.0);
        CHECK(std::abs(kd.imag()) < 1e-12 * kd.real());
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        CHECK(std::abs(kernel_k_alpha(b, pts[i], pts[i + 1]) - std::conj(kernel_k_alpha(b, pts[i + 1], pts[i]))) < 1e-12);
}

TEST_CASE("Weyl solution", "[spectral]") {
    auto ctx0 = ctx_for(BandSet{});
    FlowEvaluator f0(ctx0, make_flow(ctx0->abel, ctx0->theta0, ThetaK::build(BandSet{}, 1), Divisor{}));
    for (double x : {0.0, 0.5, 2.0}) CHECK(std::abs(weyl_solution(f0, x, -1.0) - std::exp(-x)) < 1e-14);

    auto e = testing::one_gap();
    auto ctx = ctx_for(e);
    auto d = make_divisor(e, {{1.3, 1}});
    FlowEvaluator f(ctx, make_flow(ctx->abel, ctx->theta0, ThetaK::build(e, 1), d));
    CHECK(std::abs(weyl_solution(f, 0.0, cplx(-2, 0.3)) - 1.0) < 1e-14);

    // u'' = (V - lambda) u by second differences, with V from the trace formula.
    const double x0 = 0.3, lam = -2.0;
    const auto dx = f.divisor_at(x0);
    const double v = e.gap(0).a + e.gap(0).b - 2.0 * dx[0].lambda;
    const cplx u0 = weyl_solution(f, x0, lam);
    std::vector<double> res;
    for (double h : {0.04, 0.02, 0.01}) {
        cplx dd = (weyl_solution(f, x0 + h, lam) - 2.0 * u0 + weyl_solution(f, x0 - h, lam)) / (h * h);
        res.push_back(std::abs(dd - (v - lam) * u0));
    }
    for (std::size_t i = 0; i + 1 < res.size(); ++i) CHECK_THAT(std::log2(res[i] / res[i + 1]), WithinAbs(2.0, 0.2));
    CHECK(res.back() < 1e-3);
}

TEST_CASE("identity suite", "[spectral]") {
    auto r0 = identity_suite(SpectralBundle::build(ctx_for(BandSet{}), Divisor{}));
    for (double x : {r0.wronskian, r0.pseudocontinuation, r0.reflectionless, r0.fourier, r0.m_route, r0.resolvent_sum})
        CHECK(x < 1e-12);

    auto e = testing::one_gap();
    auto b = SpectralBundle::build(ctx_for(e), make_divisor(e, {{1.5, 1}}));
    auto r = identity_suite(b);
    CHECK(r.samples == 20);
    CHECK(r.wronskian < 1e-8);
    CHECK(r.m_route < 1e-8);
    CHECK(r.resolvent_sum < 1e-9);
    CHECK(r.reflectionless < 1e-4);
    CHECK(r.pseudocontinuation < 1e-4);
    CHECK(r.fourier < 1e-6);
    for (double x : {0.1, 0.5, 1.0}) CHECK(fourier_identity_residual(b, x, cplx(0.5, 0.4), cplx(2.5, 0.7)) < 1e-6);
}

TEST_CASE("Weyl function properties", "[spectral]") {
    auto e = testing::two_gap();
    auto b = SpectralBundle::build(ctx_for(e), make_divisor(e, {{1.3, 1}, {3.4, -1}}));

    // The shift is the half character.
    CHECK(torus_distance(b.context().jshift + b.context().jshift, CharacterVector(2)) < 1e-15);
    CHECK(torus_distance(b.context().jshift, CharacterVector::half(2)) < 1e-15);

    // m_+(0) = -m_-(0), both limits from the left.
    std::vector<double> h, vp, vm;
    for (int m = 3; m <= 6; ++m) {
        const double lam = -std::pow(10.0, -m);
        h.push_back(-lam);
        vp.push_back(b.m_plus(lam).real());
        vm.push_back(b.m_minus_ratio(lam).real());
    }
    const double mp0 = richardson_limit<double>(h, vp, 0.5).value;
    const double mm0 = richardson_limit<double>(h, vm, 0.5).value;
    CHECK_THAT(mp0, WithinAbs(-mm0, 1e-8));
    CHECK_THAT(mp0, WithinAbs(b.m_plus_zero(), 1e-8));

    // The (1,1) entry changes sign in every gap.
    for (const auto& g : e.gaps()) {
        bool found = false;
        const int n = 400;
        for (int i = 1; i < n - 1 && !found; ++i) {
            const double x0 = g.a + g.width() * i / n, x1 = g.a + g.width() * (i + 1) / n;
            double r0 = 0.0, r1 = 0.0;
            try {
                r0 = b.r11(x0).real();
                r1 = b.r11(x1).real();
            } catch (const NumericalError&) {
                continue;
            }
            if (r0 * r1 < 0.0 && std::abs(r0) < 1e3 && std::abs(r1) < 1e3) {
                double root = bracketed_root([&](double x) { return b.r11(x).real(); }, x0, x1);
                found = std::abs(b.r11(root)) < 1e-8;
            }
        }
        CHECK(found);
    }
}
