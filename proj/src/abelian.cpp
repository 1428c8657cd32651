#include "fgap/abelian.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

namespace fgap {

namespace {

constexpr cplx I{0.0, 1.0};
constexpr double PI = std::numbers::pi;

// Taylor coefficients of prod ((1 - a z)(1 - b z))^(power) through z^order, power = +-1/2.
TruncatedSeries<double> gap_product_series(const BandSet& e, std::size_t order, double power) {
    TruncatedSeries<double> l(order);
    for (std::size_t n = 1; n <= order; ++n) {
        double s = 0.0;
        for (const auto& g : e.gaps()) s += std::pow(g.a, n) + std::pow(g.b, n);
        l[n] = -power * s / static_cast<double>(n);
    }
    return series_exp(l);
}

Eigen::VectorXd solve_checked(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < a.rows()) throw BuildError(fmt::format("singular normalization system for {}", what));
    double rc = lu.rcond();
    if (!(rc > 1e-14)) throw BuildError(fmt::format("ill-conditioned normalization system for {}", what));
    return lu.solve(b);
}

// Real part after removing the piece phase: the integral of xi^i / |s|^(1/2) over a gap or band.
double unphased(const Piece& p, cplx v) { return (p.phase * v).real(); }

} // namespace

// ---------------------------------------------------------------- ThetaK

namespace {

// In z = 1/lambda: qh(z) = z^(N+k) Q(1/z), sz(z) = prod (1 - a z)(1 - b z), and
// dh = qh^2 - (k + 1/2)^2 sz with its coefficients through z^k cancelled exactly.
struct AsymptoticForm {
    std::vector<double> qh, sz, dh;
};

AsymptoticForm asymptotic_form(const ThetaK& t) {
    const std::size_t n = t.bands().size();
    const std::size_t uk = static_cast<std::size_t>(t.order());
    const double lead = t.order() + 0.5;
    auto q = t.numerator();
    AsymptoticForm af;
    af.qh.resize(n + uk + 1);
    for (std::size_t j = 0; j <= n + uk; ++j) af.qh[j] = q[n + uk - j];
    af.sz = {1.0};
    for (const auto& g : t.bands().gaps()) {
        std::vector<double> f{1.0, -(g.a + g.b), g.a * g.b};
        af.sz = poly_mul(af.sz, f);
    }
    af.dh = poly_mul(af.qh, af.qh);
    for (std::size_t j = 0; j < af.sz.size(); ++j) af.dh[j] -= lead * lead * af.sz[j];
    for (std::size_t j = 0; j <= uk && j < af.dh.size(); ++j) af.dh[j] = 0.0;
    return af;
}

} // namespace

ThetaK ThetaK::build(const BandSet& e, int k, QuadOptions o) {
    if (k < 0) throw ValidationError("order k must be non-negative");
    ThetaK t;
    t.s_ = SqrtS(e);
    t.k_ = k;
    t.opt_ = o;
    const std::size_t n = e.size();
    const std::size_t uk = static_cast<std::size_t>(k);
    const double lead = k + 0.5;

    auto p = gap_product_series(e, uk, 0.5);
    t.q_.assign(n + uk + 1, 0.0);
    for (std::size_t m = 0; m <= uk; ++m) t.q_[n + uk - m] = lead * p[m];

    if (n > 0) {
        Eigen::MatrixXd a(n, n);
        Eigen::VectorXd rhs(n);
        for (std::size_t g = 0; g < n; ++g) {
            Piece pc = make_piece(t.s_, e.gap(g).a, e.gap(g).b);
            rhs(g) = 0.0;
            for (std::size_t i = 0; i <= n + uk; ++i) {
                auto f = [&](const LineNode& nd) { return std::pow(nd.xi, static_cast<double>(i)) * nd.js; };
                double m = unphased(pc, integrate_piece(t.s_, pc, f, o));
                if (i < n)
                    a(g, i) = m;
                else
                    rhs(g) -= t.q_[i] * m;
            }
        }
        Eigen::VectorXd x = solve_checked(a, rhs, "the generalized Abelian integral");
        for (std::size_t i = 0; i < n; ++i) t.q_[i] = x(i);
    }

    for (std::size_t g = 0; g < n; ++g) {
        Piece pc = make_piece(t.s_, e.gap(g).a, e.gap(g).b);
        auto f = [&](const LineNode& nd) { return poly_eval(t.q_, nd.xi) * nd.js; };
        t.residual_ = std::max(t.residual_, std::abs(integrate_piece(t.s_, pc, f, o)));
        auto qf = [&](double x) { return poly_eval(t.q_, x); };
        try {
            t.c_.push_back(bracketed_root(qf, e.gap(g).a, e.gap(g).b));
        } catch (const NumericalError&) {
            throw BuildError(fmt::format("no critical point found in gap {}", g + 1));
        }
    }

    std::vector<double> scaled(t.q_);
    for (auto& v : scaled) v /= lead;
    auto roots = poly_from_roots(t.c_);
    t.pi_ = poly_divmod(scaled, roots).first;

    t.bp_ = e.branch_points();
    t.bp_val_.assign(t.bp_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < t.bp_.size(); ++i) {
        Piece pc = make_piece(t.s_, t.bp_[i], t.bp_[i + 1]);
        auto f = [&](const LineNode& nd) { return poly_eval(t.q_, nd.xi) * nd.js; };
        t.bp_val_[i + 1] = t.bp_val_[i] + integrate_piece(t.s_, pc, f, o);
    }
    for (std::size_t g = 0; g < n; ++g) {
        t.eta_.push_back(-t.bp_val_[2 * g + 1].real() / PI);
        t.h_.push_back(t.on_axis(t.c_[g]).imag());
    }
    return t;
}

cplx ThetaK::derivative(cplx lam) const { return poly_eval(q_, lam) / s_(lam); }

cplx ThetaK::on_axis(double x) const {
    auto f = [&](const LineNode& nd) { return poly_eval(q_, nd.xi) * nd.js; };
    if (x == 0.0) return 0.0;
    if (x < 0.0) return -integrate_piece(s_, make_piece(s_, x, 0.0), f, opt_);
    if (x >= bp_.back()) {
        if (x == bp_.back()) return bp_val_.back();
        return bp_val_.back() + integrate_piece(s_, make_piece(s_, bp_.back(), x), f, opt_);
    }
    std::size_t i = 0;
    while (i + 2 < bp_.size() && x > bp_[i + 1]) ++i;
    return bp_val_[i] + integrate_piece(s_, make_piece(s_, bp_[i], bp_[i + 1]), f, opt_, x);
}

cplx ThetaK::operator()(cplx lam) const {
    if (lam.imag() < 0.0) throw ValidationError("Theta is evaluated on the closed upper half-plane");
    double x = lam.real();
    cplx base = on_axis(x);
    double y = lam.imag();
    if (y == 0.0) return base;
    auto g = [&](double v) { return derivative(cplx(x, y * v * v)) * (2.0 * y * v) * I; };
    return base + detail::adaptive_gk(g, 0.0, 1.0, opt_);
}

cplx ThetaK::minus_power(double x) const {
    if (!(x < 0.0)) throw ValidationError("minus_power expects a negative abscissa");
    const double r = 4.0 * std::max(1.0, bp_.back());
    if (-x <= r) return on_axis(x) - half_power(cplx(x, 0.0), k_);
    const double lead = k_ + 0.5;
    const auto af = asymptotic_form(*this);
    auto h = [&](double xi) {
        double z = 1.0 / xi;
        double pz = std::sqrt(poly_eval(af.sz, z));
        double ratio = poly_eval(af.dh, z) / (pz * (poly_eval(af.qh, z) + lead * pz));
        return std::pow(xi, k_) / (I * std::sqrt(-xi)) * ratio;
    };
    auto g = [&](double v) { return h(-1.0 / (v * v)) * (2.0 / (v * v * v)); };
    cplx base = on_axis(-r) - half_power(cplx(-r, 0.0), k_);
    return base - detail::adaptive_gk(g, 1.0 / std::sqrt(-x), 1.0 / std::sqrt(r), opt_);
}

// ---------------------------------------------------------------- GreenPole

GreenPole GreenPole::build(const BandSet& e, double l0, QuadOptions o) { return build_impl(e, l0, o, true); }

GreenPole GreenPole::measures_only(const BandSet& e, double l0, QuadOptions o) {
    return build_impl(e, l0, o, false);
}

GreenPole GreenPole::build_impl(const BandSet& e, double l0, QuadOptions o, bool with_phi) {
    GreenPole gp;
    gp.s_ = SqrtS(e);
    // Poles close to a gap end put a peak of width sqrt(distance) into the band integrals.
    o.max_depth = std::max(o.max_depth, 60u);
    gp.opt_ = o;
    gp.l0_ = l0;
    const std::size_t n = e.size();
    if (!std::isfinite(l0)) throw ValidationError("pole must be finite");

    for (std::size_t j = 0; j < n; ++j) {
        if (l0 == e.gap(j).a || l0 == e.gap(j).b) {
            gp.trivial_ = true;
            gp.trivial_gap_ = static_cast<int>(j) + 1;
            gp.trivial_upper_ = l0 == e.gap(j).b;
            for (std::size_t k = 0; k <= n; ++k) {
                int kk = static_cast<int>(k);
                bool inside = gp.trivial_upper_ ? kk <= gp.trivial_gap_ : kk < gp.trivial_gap_;
                gp.omega_.push_back(inside ? 1.0 : 0.0);
            }
            gp.r_ = {0.0};
            gp.g_m1_ = 0.0;
            gp.phi_ready_ = true;
            return gp;
        }
    }
    const int g0 = e.gap_index(l0);
    if (l0 >= 0.0 && g0 < 0) throw ValidationError(fmt::format("pole {} lies on the spectrum", l0));

    auto bp = gp.s_.branch_points();
    gp.d0_ = std::numeric_limits<double>::infinity();
    for (double c : bp) gp.d0_ = std::min(gp.d0_, std::abs(l0 - c));
    gp.zstar_ = cplx(l0, -gp.d0_);
    const cplx top0 = gp.s_.top(l0);
    gp.sigma0_ = top0.imag();
    const double rl0 = (top0 / I).real();
    gp.rl0_ = rl0;

    const double scale = std::max({1.0, gp.s_.bands().top(), std::abs(l0)});
    Eigen::MatrixXd a(n + 1, n + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    const double t0 = l0 / scale;
    for (std::size_t i = 0; i <= n; ++i) a(0, i) = std::pow(t0, i);
    rhs(0) = rl0;

    // PV integral of js / (xi - l0) over the gap containing the pole.
    auto pv_kernel = [&](const Gap& gg, const Piece& pc) {
        std::vector<double> others;
        for (double c : bp)
            if (c != gg.a && c != gg.b) others.push_back(c);
        auto prod = [&](double x) {
            double p = 1.0;
            for (double c : others) p *= x - c;
            return p;
        };
        double q0 = prod(l0);
        double sq = q0 > 0.0 ? 1.0 : -1.0;
        double bb = sq * q0;
        auto dd = [&](double x) {
            const std::size_t m = others.size();
            std::vector<double> pre(m + 1, 1.0), suf(m + 1, 1.0);
            for (std::size_t l = 0; l < m; ++l) pre[l + 1] = pre[l] * (x - others[l]);
            for (std::size_t l = m; l-- > 0;) suf[l] = suf[l + 1] * (l0 - others[l]);
            double s = 0.0;
            for (std::size_t l = 0; l < m; ++l) s += pre[l] * suf[l + 1];
            return s;
        };
        auto f = [&](double theta) {
            IntervalPoint ip = detail::angle_point(gg.a, gg.b, theta);
            double aa = sq * prod(ip.x);
            double ra = std::sqrt(aa), rb = std::sqrt(bb);
            return -sq * dd(ip.x) / (ra * rb * (ra + rb));
        };
        return detail::adaptive_gk(f, 0.0, PI, o) / pc.phase;
    };

    std::vector<cplx> pv(n, 0.0);
    for (std::size_t g = 0; g < n; ++g) {
        const Gap& gg = e.gap(g);
        Piece pc = make_piece(gp.s_, gg.a, gg.b);
        if (static_cast<int>(g) == g0) pv[g] = pv_kernel(gg, pc);
        for (std::size_t i = 0; i <= n; ++i) {
            cplx v;
            if (static_cast<int>(g) == g0) {
                auto f = [&](const LineNode& nd) {
                    double s = 0.0;
                    double tx = nd.xi / scale;
                    for (std::size_t l = 0; l < i; ++l) s += std::pow(tx, l) * std::pow(t0, i - 1 - l);
                    return (s / scale) * nd.js;
                };
                v = integrate_piece(gp.s_, pc, f, o) + std::pow(t0, i) * pv[g];
            } else {
                auto f = [&](const LineNode& nd) {
                    return std::pow(nd.xi / scale, static_cast<double>(i)) / (nd.xi - l0) * nd.js;
                };
                v = integrate_piece(gp.s_, pc, f, o);
            }
            a(g + 1, i) = unphased(pc, v);
        }
    }
    Eigen::VectorXd beta = solve_checked(a, rhs, "the Green function");
    gp.r_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) gp.r_[i] = beta(i) / std::pow(scale, i);
    gp.qr_ = poly_quotient_at(gp.r_, l0);

    for (std::size_t g = 0; g < n; ++g) {
        const Gap& gg = e.gap(g);
        Piece pc = make_piece(gp.s_, gg.a, gg.b);
        cplx v;
        if (static_cast<int>(g) == g0) {
            auto f = [&](const LineNode& nd) { return poly_eval(gp.qr_, nd.xi) * nd.js; };
            v = integrate_piece(gp.s_, pc, f, o) + poly_eval(gp.r_, l0) * pv[g];
        } else {
            auto f = [&](const LineNode& nd) { return poly_eval(gp.r_, nd.xi) / (nd.xi - l0) * nd.js; };
            v = integrate_piece(gp.s_, pc, f, o);
        }
        gp.residual_ = std::max(gp.residual_, std::abs(v));
    }

    // Harmonic measures from the arg increment of Phi along the band tops.
    auto fi = [&](const LineNode& nd) { return (I * poly_eval(gp.r_, nd.xi) * nd.js / (nd.xi - l0)).imag(); };
    // Bands touching the pole's gap: split off r(l0) / (xi - l0) and take xi - l0 from exact distances.
    auto fi_near = [&](double gap_end, bool below) {
        return [&, gap_end, below](const LineNode& nd) {
            double dx = below ? -(nd.to_hi + (l0 - gap_end)) : nd.from_lo + (gap_end - l0);
            return (I * (rl0 / dx + poly_eval(gp.qr_, nd.xi)) * nd.js).imag();
        };
    };
    std::vector<double> band_im(n + 1, 0.0);
    auto bands = e.bands();
    for (std::size_t m = 0; m <= n; ++m) {
        const bool lo_near = (m == 0 && l0 < 0.0) || (g0 >= 0 && static_cast<int>(m) - 1 == g0);
        const bool hi_near = g0 >= 0 && static_cast<int>(m) == g0;
        if (m < n && !lo_near && !hi_near) {
            band_im[m] = integrate_piece(gp.s_, make_piece(gp.s_, bands[m].lo, bands[m].hi), fi, o);
        } else if (m < n) {
            Piece pc = make_piece(gp.s_, bands[m].lo, bands[m].hi);
            band_im[m] = hi_near ? integrate_piece(gp.s_, pc, fi_near(bands[m].hi, true), o)
                                 : integrate_piece(gp.s_, pc, fi_near(bands[m].lo, false), o);
        } else if (lo_near) {
            double t = tail_split(bands[m].lo);
            band_im[m] = integrate_piece(gp.s_, make_piece(gp.s_, bands[m].lo, t), fi_near(bands[m].lo, false), o) +
                         integrate_piece(gp.s_, positive_tail(gp.s_, t), fi, o);
        } else {
            double t = tail_split(bands[m].lo);
            band_im[m] = integrate_piece(gp.s_, make_piece(gp.s_, bands[m].lo, t), fi, o) +
                         integrate_piece(gp.s_, positive_tail(gp.s_, t), fi, o);
        }
    }
    gp.omega_.assign(n + 1, 0.0);
    double acc = 0.0;
    for (std::size_t m = n + 1; m-- > 0;) {
        acc += band_im[m];
        gp.omega_[m] = acc / PI;
    }
    if (!with_phi) return gp;

    const double l = l0 < 0.0 ? std::max(1.0, 2.0 * std::abs(l0)) : 1.0;
    gp.pieces_ = standard_pieces(gp.s_, l);
    gp.cum_.assign(gp.pieces_.size() + 1, 0.0);
    for (std::size_t i = 0; i < gp.pieces_.size(); ++i) {
        auto fr = [&](const LineNode& nd) { return gp.reg_axis(gp.pieces_[i], nd); };
        gp.cum_[i + 1] = gp.cum_[i] + integrate_piece(gp.s_, gp.pieces_[i], fr, o);
    }

    gp.phi_ready_ = true;
    gp.g_m1_ = l0 == -1.0 ? std::numeric_limits<double>::infinity() : gp.green(cplx(-1.0, 0.0));
    return gp;
}

cplx GreenPole::dlog(cplx lam) const {
    if (trivial_) return 0.0;
    return I * poly_eval(r_, lam) / ((lam - l0_) * s_(lam));
}

cplx GreenPole::reg(cplx z) const {
    cplx d = z - l0_;
    cplx core;
    cplx sq = s_(z);
    if (std::abs(d) < 0.25 * d0_) {
        cplx sig0(0.0, sigma0_);
        core = (I * poly_eval(qr_, z) - s_.divided_difference(z, l0_) / (sq + sig0)) / sq;
    } else {
        core = I * poly_eval(r_, z) / (d * sq) - 1.0 / d;
    }
    return core + 1.0 / (z - zstar_);
}

cplx GreenPole::reg_axis(const Piece& p, const LineNode& nd) const {
    double d = nd.xi - l0_;
    if (p.kind == PieceKind::Finite)
        d = std::abs(l0_ - p.lo) <= std::abs(l0_ - p.hi) ? nd.from_lo + (p.lo - l0_) : -(nd.to_hi + (l0_ - p.hi));
    cplx core;
    if (std::abs(d) < 0.25 * d0_) {
        cplx sq = nd.jac / nd.js;
        cplx sig0(0.0, sigma0_);
        core = (I * poly_eval(qr_, nd.xi) - s_.divided_difference(cplx(nd.xi, 0.0), l0_) / (sq + sig0)) * nd.js;
    } else {
        core = (I * rl0_ / d + I * poly_eval(qr_, nd.xi)) * nd.js - nd.jac / d;
    }
    return core + nd.jac / cplx(d, d0_);
}

cplx GreenPole::line_value(double x) const {
    std::size_t i = piece_index(pieces_, x);
    auto fr = [&](const LineNode& nd) { return reg_axis(pieces_[i], nd); };
    return cum_[i] + integrate_piece(s_, pieces_[i], fr, opt_, x);
}

cplx GreenPole::log_phi(cplx lam) const {
    if (trivial_) return 0.0;
    if (!phi_ready_) throw ValidationError("Green pole was built for harmonic measures only");
    if (lam.imag() < 0.0) throw ValidationError("Phi is evaluated on the closed upper half-plane");
    if (lam == cplx(l0_, 0.0)) throw ValidationError("Phi evaluated at its zero");
    const double x = lam.real();
    const double y = lam.imag();
    cplx t = line_value(x);
    if (y > 0.0) {
        auto g = [&](double v) { return reg(cplx(x, y * v * v)) * (2.0 * y * v) * I; };
        t += detail::adaptive_gk(g, 0.0, 1.0, opt_);
    }
    cplx at = y == 0.0 ? cplx(x, 0.0) : lam;
    return std::log(at - l0_) - std::log(at - zstar_) + t;
}

CharacterVector GreenPole::character() const {
    return CharacterVector(std::vector<double>(omega_.begin() + 1, omega_.end()));
}

std::vector<double> harmonic_measures(const BandSet& e, double lambda0, QuadOptions o) {
    auto gp = GreenPole::measures_only(e, lambda0, o);
    return {gp.harmonic_measures().begin() + 1, gp.harmonic_measures().end()};
}

// ---------------------------------------------------------------- Widom, entropy

cplx WidomFunction::operator()(cplx lam) const {
    cplx s = 0.0;
    for (const auto& f : factors) s += f.log_phi(lam);
    return std::exp(s);
}

WidomFunction widom_function(const BandSet& e, const ThetaK& theta0, QuadOptions o) {
    WidomFunction w;
    w.character = CharacterVector(e.size());
    for (double c : theta0.critical_points()) {
        w.factors.push_back(GreenPole::build(e, c, o));
        w.character = w.character + w.factors.back().character();
    }
    return w;
}

double ids_density(const ThetaK& theta0, double xi) {
    return (2.0 * std::sqrt(xi) * poly_eval(theta0.numerator(), xi) / theta0.sqrt_s().top(xi)).real();
}

WidomEntropy widom_sum_and_entropy(const ThetaK& theta0, QuadOptions o) {
    WidomEntropy r{};
    for (double h : theta0.needle_heights()) r.widom_sum += h;
    if (theta0.order() != 0) throw ValidationError("the density needs the order-0 integral");
    const SqrtS& s = theta0.sqrt_s();
    auto q = theta0.numerator();
    const auto af = asymptotic_form(theta0);
    auto f = [&](const LineNode& nd) {
        double core = (2.0 * poly_eval(q, nd.xi) * nd.js).real();
        double rho = std::sqrt(nd.xi) * core / nd.jac;
        if (!(rho > 0.0) || !std::isfinite(rho)) return 0.0;
        return std::log(rho) * core;
    };
    // log rho is singular at gap edges, which tanh-sinh handles and Gauss-Kronrod does not.
    boost::math::quadrature::tanh_sinh<double> ts;
    auto finite = [&](const Piece& pc) {
        auto g = [&](double theta) { return f(finite_node(s, pc, theta)); };
        return ts.integrate(g, 0.0, PI, o.tol);
    };
    double total = 0.0;
    for (const auto& b : theta0.bands().bands()) {
        if (std::isfinite(b.hi)) {
            total += finite(make_piece(s, b.lo, b.hi));
        } else {
            double t = tail_split(b.lo);
            total += finite(make_piece(s, b.lo, t));
            // rho - 1 = dh / (P (qh + P / 2)) in z = 1/xi = v^2; dxi / sqrt(xi) = 2 dv / v^2.
            auto tail = [&](double v) {
                double z = v * v;
                double pz = std::sqrt(poly_eval(af.sz, z));
                double excess = poly_eval(af.dh, z) / (0.5 * pz * (poly_eval(af.qh, z) + 0.5 * pz));
                return std::log1p(excess) * (1.0 + excess) * 2.0 / z;
            };
            total += detail::adaptive_gk(tail, 0.0, 1.0 / std::sqrt(t), o);
        }
    }
    r.entropy = total / (2.0 * PI);
    r.entropy_literal = -2.0 * total;
    r.difference = r.widom_sum - r.entropy;
    return r;
}

// ---------------------------------------------------------------- first kind, B-periods

cplx FirstKindBasis::a_period(std::size_t l, std::size_t j, QuadOptions o) const {
    const Gap& g = s.bands().gap(j);
    Piece pc = make_piece(s, g.a, g.b);
    const auto& p = numerators.at(l);
    auto f = [&](const LineNode& nd) { return I * poly_eval(p, nd.xi) * nd.js; };
    return 2.0 * integrate_piece(s, pc, f, o);
}

FirstKindBasis first_kind_basis(const BandSet& e, QuadOptions o) {
    const std::size_t n = e.size();
    if (n == 0) throw ValidationError("first-kind differentials need at least one gap");
    FirstKindBasis fb{SqrtS(e), {}};
    Eigen::MatrixXd a(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        Piece pc = make_piece(fb.s, e.gap(j).a, e.gap(j).b);
        for (std::size_t i = 0; i < n; ++i) {
            auto f = [&](const LineNode& nd) { return I * std::pow(nd.xi, static_cast<double>(i)) * nd.js; };
            a(j, i) = (2.0 * integrate_piece(fb.s, pc, f, o)).real();
        }
    }
    Eigen::MatrixXd inv = Eigen::FullPivLU<Eigen::MatrixXd>(a).inverse();
    for (std::size_t l = 0; l < n; ++l) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = inv(i, l);
        fb.numerators.push_back(std::move(p));
    }
    return fb;
}

BPeriodReport b_period_check(const BandSet& e, int k, QuadOptions o) {
    const std::size_t n = e.size();
    auto th = ThetaK::build(e, k, o);
    auto fb = first_kind_basis(e, o);
    const std::size_t uk = static_cast<std::size_t>(k);
    auto u = gap_product_series(e, uk + n, -0.5);
    BPeriodReport rep;
    for (std::size_t j = 0; j < n; ++j) {
        double lhs = -2.0 * th(cplx(e.gap(j).a, 0.0)).real();
        double coeff = 0.0;
        const auto& p = fb.numerators[j];
        for (std::size_t i = 0; i < n; ++i) {
            long idx = static_cast<long>(uk) - static_cast<long>(n - 1 - i);
            if (idx >= 0) coeff += p[i] * u[static_cast<std::size_t>(idx)];
        }
        double rhs = -4.0 * PI * coeff;
        rep.lhs.push_back(lhs);
        rep.rhs.push_back(rhs);
        double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
        rep.max_relative = std::max(rep.max_relative, rel);
    }
    return rep;
}

double martin_from_green(const BandSet& e, int k, cplx lam, QuadOptions o) {
    double total = half_power(lam, k).imag();
    const double lead = k + 0.5;
    for (const auto& g : e.gaps()) {
        auto f = [&](double theta) {
            IntervalPoint ip = detail::angle_point(g.a, g.b, theta);
            auto gp = GreenPole::build(e, ip.x, o);
            double jac = std::sqrt(ip.from_lo * ip.to_hi);
            return gp.green(lam) * lead * std::pow(ip.x, k - 0.5) * jac;
        };
        total += boost::math::quadrature::gauss<double, 30>::integrate(f, 0.0, PI) / PI;
    }
    return total;
}

BlaschkeLimit blaschke_limit(const ThetaK& theta0, const Divisor& d, int m_lo, int m_hi, QuadOptions o) {
    const BandSet& e = theta0.bands();
    if (d.size() != e.size()) throw ValidationError("divisor does not match the band set");
    if (m_hi - m_lo < 2) throw ValidationError("need at least three sample points");
    BlaschkeLimit out;
    auto ref = GreenPole::build(e, -1.0, o);
    std::vector<GreenPole> poles;
    for (const auto& p : d) {
        if (p.eps != 1) continue;
        out.expected += theta0.martin(cplx(p.lambda, 0.0));
        poles.push_back(GreenPole::build(e, p.lambda, o));
    }
    const double m1 = theta0.martin(cplx(-1.0, 0.0));
    std::vector<double> h;
    for (int m = m_lo; m <= m_hi; ++m) {
        const double lam = -std::pow(10.0, m);
        double s = 0.0;
        for (const auto& g : poles) s += g.green(cplx(lam, 0.0));
        out.lambda.push_back(lam);
        out.ratio.push_back(m1 / ref.green(cplx(lam, 0.0)) * s);
        h.push_back(std::pow(10.0, -0.5 * m));
    }
    auto lim = richardson_limit<double>(h, out.ratio, 1.0);
    out.limit = lim.value;
    out.error = lim.error;
    const double scale = std::max(std::abs(out.expected), 1e-300);
    out.relative = out.expected == 0.0 ? std::abs(out.limit) : std::abs(out.limit - out.expected) / scale;
    return out;
}

double green_ratio_margin(const ThetaK& theta0, double lambda_star, std::span<const double> points, QuadOptions o) {
    if (lambda_star >= -1.0) throw ValidationError("the reference pole must lie below -1");
    const BandSet& e = theta0.bands();
    auto g = GreenPole::build(e, lambda_star, o);
    const double m1 = theta0.martin(cplx(-1.0, 0.0));
    const double g1 = g.green(cplx(-1.0, 0.0));
    double margin = std::numeric_limits<double>::infinity();
    for (double x : points) {
        if (e.gap_index(x) < 0) throw ValidationError(fmt::format("{} is not inside a gap", x));
        margin = std::min(margin, theta0.martin(cplx(x, 0.0)) / m1 - g.green(cplx(x, 0.0)) / g1);
    }
    return margin;
}

std::vector<double> power_defect_decay(const ThetaK& theta, int m_lo, int m_hi) {
    std::vector<double> out;
    for (int m = m_lo; m <= m_hi; ++m) out.push_back(std::abs(theta.minus_power(-std::pow(10.0, m))));
    return out;
}

} // namespace fgap
