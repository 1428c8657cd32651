#pragma once

#include "fgap/errors.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <type_traits>
#include <vector>

namespace fgap {

using cplx = std::complex<double>;

struct QuadOptions {
    double tol = 1e-11;
    unsigned max_depth = 20;
};

// A node inside [lo, hi] with both endpoint distances computed without cancellation.
struct IntervalPoint {
    double x;
    double from_lo;
    double to_hi;
};

namespace detail {

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const cplx& v) { return std::abs(v); }

// Globally adaptive Gauss-Kronrod (31 points): bisect the segment with the largest error until the
// summed error is below tol * L1. Segments are never narrower than (hi - lo) / 2^max_depth.
template <class F>
auto adaptive_gk(F&& f, double lo, double hi, const QuadOptions& o) {
    using R = std::decay_t<std::invoke_result_t<F&, double>>;
    if (lo == hi) return R{};
    struct Segment {
        double a, b;
        unsigned depth;
        R value;
        double err, l1;
    };
    auto rule = [&](double a, double b, unsigned depth) {
        const double m = 0.5 * (a + b), h = 0.5 * (b - a);
        auto g = [&](double x) { return f(h * x + m); };
        double err = 0.0, l1 = 0.0;
        R v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -1.0, 1.0, 0, 0.0, &err, &l1);
        return Segment{a, b, depth, v * h, err * std::abs(h), l1 * std::abs(h)};
    };
    auto by_error = [](const Segment& x, const Segment& y) { return x.err < y.err; };
    std::vector<Segment> heap{rule(lo, hi, 0)};
    double err = heap.front().err, l1 = heap.front().l1;
    constexpr std::size_t max_segments = 4096;
    while (err > std::max(o.tol * l1, 1e-300) && heap.size() < max_segments) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Segment s = heap.back();
        if (s.depth >= o.max_depth) {
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;
        }
        heap.pop_back();
        const double m = 0.5 * (s.a + s.b);
        for (auto part : {rule(s.a, m, s.depth + 1), rule(m, s.b, s.depth + 1)}) {
            heap.push_back(part);
            std::push_heap(heap.begin(), heap.end(), by_error);
        }
        err = 0.0;
        l1 = 0.0;
        for (const auto& x : heap) {
            err += x.err;
            l1 += x.l1;
        }
    }
    R v{};
    for (const auto& x : heap) v += x.value;
    if (!std::isfinite(magnitude(v)))
        throw QuadratureError("quadrature produced a non-finite value", magnitude(v), err);
    if (err > std::max(100.0 * o.tol * l1, 1e-300))
        throw QuadratureError("quadrature did not converge within the refinement limit", magnitude(v), err);
    return v;
}

template <class F>
auto call_point(F& f, const IntervalPoint& p) {
    if constexpr (std::is_invocable_v<F&, const IntervalPoint&>)
        return f(p);
    else
        return f(p.x);
}

// Node of [lo, hi] at angle theta of xi = m - r cos(theta).
inline IntervalPoint angle_point(double lo, double hi, double theta) {
    double r = 0.5 * (hi - lo);
    double s = std::sin(0.5 * theta);
    double c = std::cos(0.5 * theta);
    double dl = 2.0 * r * s * s;
    double dh = 2.0 * r * c * c;
    double x = theta < 0.5 * std::numbers::pi ? lo + dl : hi - dh;
    return {x, dl, dh};
}

inline double angle_of(double lo, double hi, double x) {
    double r = 0.5 * (hi - lo);
    return std::acos(std::clamp((0.5 * (lo + hi) - x) / r, -1.0, 1.0));
}

} // namespace detail

// Integral over (a, b) of f(xi) / sqrt((xi - a)(b - xi)), optionally only up to x.
// f may take a double or an IntervalPoint.
template <class F>
auto gap_quadrature(F&& f, double a, double b, const QuadOptions& o = {},
                    std::optional<double> upto = std::nullopt) {
    double th = upto ? detail::angle_of(a, b, *upto) : std::numbers::pi;
    auto g = [&](double theta) { return detail::call_point(f, detail::angle_point(a, b, theta)); };
    return detail::adaptive_gk(g, 0.0, th, o);
}

// Integral over [lo, hi] of f(xi) where f may carry inverse square-root singularities at both ends.
template <class F>
auto band_quadrature(F&& f, double lo, double hi, const QuadOptions& o = {},
                     std::optional<double> upto = std::nullopt) {
    double th = upto ? detail::angle_of(lo, hi, *upto) : std::numbers::pi;
    auto g = [&](double theta) {
        auto p = detail::angle_point(lo, hi, theta);
        return detail::call_point(f, p) * std::sqrt(p.from_lo * p.to_hi);
    };
    return detail::adaptive_gk(g, 0.0, th, o);
}

inline double tail_split(double b) { return std::max(2.0 * b, b + 1.0); }

// Integral of f over [b, inf) for f decaying like xi^(-3/2) or faster, possibly singular at b.
template <class F>
auto band_tail_quadrature(F&& f, double b, const QuadOptions& o = {}) {
    double l = tail_split(b);
    auto near = band_quadrature(f, b, l, o);
    double vmax = 1.0 / std::sqrt(l);
    auto g = [&](double v) {
        double x = 1.0 / (v * v);
        return detail::call_point(f, IntervalPoint{x, x - b, std::numeric_limits<double>::infinity()}) *
               (2.0 / (v * v * v));
    };
    double g1 = detail::magnitude(g(1e-3 * vmax));
    double g2 = detail::magnitude(g(1e-6 * vmax));
    if (g2 > 10.0 * g1 + 1e-300)
        throw QuadratureError("integrand decays too slowly for the tail substitution", g2, g1);
    return near + detail::adaptive_gk(g, 0.0, vmax, o);
}

// Formal series c_0 + c_1 z + ... + c_M z^M with z = 1/lambda (or 1/mu).
template <class T = double>
class TruncatedSeries {
public:
    explicit TruncatedSeries(std::size_t order) : c_(order + 1, T{}) {}
    explicit TruncatedSeries(std::vector<T> coeffs) : c_(std::move(coeffs)) {
        if (c_.empty()) c_.push_back(T{});
    }

    std::size_t order() const { return c_.size() - 1; }
    const T& operator[](std::size_t n) const { return c_[n]; }
    T& operator[](std::size_t n) { return c_[n]; }
    std::span<const T> coefficients() const { return c_; }

    TruncatedSeries operator+(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t n = 0; n <= r.order(); ++n) r[n] = c_[n] + o[n];
        return r;
    }
    TruncatedSeries operator-(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t n = 0; n <= r.order(); ++n) r[n] = c_[n] - o[n];
        return r;
    }
    TruncatedSeries operator*(const TruncatedSeries& o) const {
        TruncatedSeries r(std::min(order(), o.order()));
        for (std::size_t n = 0; n <= r.order(); ++n)
            for (std::size_t k = 0; k <= n; ++k) r[n] += c_[k] * o[n - k];
        return r;
    }
    TruncatedSeries operator*(const T& s) const {
        TruncatedSeries r(*this);
        for (auto& x : r.c_) x *= s;
        return r;
    }

private:
    std::vector<T> c_;
};

// exp of a truncated series through n b_n = sum_k k a_k b_{n-k}.
template <class T>
TruncatedSeries<T> series_exp(const TruncatedSeries<T>& a) {
    using std::exp;
    TruncatedSeries<T> b(a.order());
    b[0] = exp(a[0]);
    for (std::size_t n = 1; n <= a.order(); ++n) {
        T s{};
        for (std::size_t k = 1; k <= n; ++k) s += static_cast<double>(k) * a[k] * b[n - k];
        b[n] = s / static_cast<double>(n);
    }
    return b;
}

template <class T>
TruncatedSeries<T> series_log(const TruncatedSeries<T>& b) {
    using std::log;
    TruncatedSeries<T> a(b.order());
    a[0] = log(b[0]);
    for (std::size_t n = 1; n <= b.order(); ++n) {
        T s = static_cast<double>(n) * b[n];
        for (std::size_t k = 1; k < n; ++k) s -= static_cast<double>(k) * a[k] * b[n - k];
        a[n] = s / (static_cast<double>(n) * b[0]);
    }
    return a;
}

struct RootOptions {
    double tol = 0.0;
    int max_iter = 200;
};

// Root of f on [lo, hi] given a sign change; TOMS 748 bracketing.
double bracketed_root(const std::function<double(double)>& f, double lo, double hi, RootOptions o = {});

template <class T>
struct LimitEstimate {
    T value;
    double error;
    bool warn;
};

// Extrapolates samples v_i taken at abscissae h_i -> 0. With a known order p the error model is
// c_1 h^p + c_2 h^{2p} + ... (Neville in h^p); otherwise iterated Aitken on the sequence.
template <class T>
LimitEstimate<T> richardson_limit(std::span<const double> h, std::span<const T> v,
                                  std::optional<double> order = std::nullopt) {
    using detail::magnitude;
    const std::size_t n = v.size();
    if (n < 3 || h.size() != n) throw NumericalError("richardson_limit needs at least three samples");
    LimitEstimate<T> out{v[n - 1], 0.0, false};
    if (order) {
        std::vector<T> t(v.begin(), v.end());
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = std::pow(h[i], *order);
        T prev = t[n - 1];
        for (std::size_t k = 1; k < n; ++k) {
            for (std::size_t i = n - 1; i >= k; --i)
                t[i] = t[i] + (t[i] - t[i - 1]) * (x[i] / (x[i - k] - x[i]));
            if (k == n - 2) prev = t[n - 1];
        }
        out.value = t[n - 1];
        out.error = magnitude(out.value - prev);
    } else {
        std::vector<T> s(v.begin(), v.end());
        T prev = s.back();
        while (s.size() >= 3) {
            std::vector<T> next;
            for (std::size_t i = 0; i + 2 < s.size(); ++i) {
                T d1 = s[i + 1] - s[i];
                T d2 = s[i + 2] - s[i + 1];
                T den = d2 - d1;
                if (magnitude(den) <= 1e-300 || magnitude(d2) == 0.0)
                    next.push_back(s[i + 2]);
                else
                    next.push_back(s[i + 2] - d2 * d2 / den);
            }
            prev = s.back();
            s = std::move(next);
        }
        out.value = s.back();
        out.error = magnitude(out.value - prev);
    }
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (magnitude(v[i + 1] - out.value) > magnitude(v[i] - out.value) * (1.0 + 1e-12) + 1e-15)
            out.warn = true;
    return out;
}

// Real polynomial helpers (coefficients lowest degree first).
double poly_eval(std::span<const double> c, double x);
cplx poly_eval(std::span<const double> c, cplx x);
// (p(x) - p(x0)) / (x - x0), exact synthetic division.
std::vector<double> poly_quotient_at(std::span<const double> c, double x0);
std::vector<double> poly_mul(std::span<const double> p, std::span<const double> q);
// Monic polynomial with the given real roots.
std::vector<double> poly_from_roots(std::span<const double> roots);
// Quotient and remainder of p / d.
std::pair<std::vector<double>, std::vector<double>> poly_divmod(std::span<const double> p,
                                                                std::span<const double> d);

} // namespace fgap
