#pragma once

#include "dmin/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

namespace dmin {

using Complex = std::complex<double>;

/// Closed parameter rectangle [u0,u1] x [v0,v1].
struct Rect {
    double u0 = -1.0, u1 = 1.0, v0 = -1.0, v1 = 1.0;

    double width() const noexcept { return u1 - u0; }
    double height() const noexcept { return v1 - v0; }
    bool valid() const noexcept { return u1 > u0 && v1 > v0; }
    bool contains(double u, double v, double slack = 0.0) const noexcept {
        return u >= u0 - slack && u <= u1 + slack && v >= v0 - slack && v <= v1 + slack;
    }
    bool contains(Complex w, double slack = 0.0) const noexcept { return contains(w.real(), w.imag(), slack); }
    Rect inset(double margin) const { return {u0 + margin, u1 - margin, v0 + margin, v1 - margin}; }
    /// Distance from an interior point to the nearest edge.
    double distance_to_boundary(Complex w) const noexcept {
        return std::min({w.real() - u0, u1 - w.real(), w.imag() - v0, v1 - w.imag()});
    }
};

/// Number of nodes along u and v (both >= 2).
struct GridSpec {
    int nu = 64;
    int nv = 64;

    bool valid() const noexcept { return nu >= 2 && nv >= 2; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv); }
};

inline double grid_coord(double a, double b, int n, int k) {
    return k == n - 1 ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
}

/// Node (i, j) of a uniform grid over `r`, i along u and j along v.
inline std::pair<double, double> grid_node(const Rect& r, const GridSpec& g, int i, int j) {
    return {grid_coord(r.u0, r.u1, g.nu, i), grid_coord(r.v0, r.v1, g.nv, j)};
}

/// Default finite-difference step: 1e-4 scaled by the half-extent of the domain.
inline double default_step(const Rect& r) {
    return 1e-4 * std::max(1.0, 0.5 * std::max(r.width(), r.height()));
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature

struct GaussLegendreRule {
    std::vector<double> nodes;   // on [-1, 1]
    std::vector<double> weights;
};

inline GaussLegendreRule gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline const GaussLegendreRule& gauss_legendre16() {
    static const GaussLegendreRule rule = gauss_legendre(16);
    return rule;
}

struct QuadConfig {
    double abs_tol = 1e-10;
    int max_depth = 40;
};

namespace detail {

template <std::size_t N, class Fn>
std::array<Complex, N> gl16_panel(Fn& f, Complex a, Complex b) {
    const auto& rule = gauss_legendre16();
    const Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::array<Complex, N> sum{};
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const std::array<Complex, N> v = f(mid + half * rule.nodes[k]);
        for (std::size_t c = 0; c < N; ++c) sum[c] += rule.weights[k] * v[c];
    }
    for (auto& s : sum) s *= half;
    return sum;
}

template <std::size_t N, class Fn>
std::array<Complex, N> adaptive(Fn& f, Complex a, Complex b, const std::array<Complex, N>& whole,
                                double tol, int depth, const QuadConfig& cfg) {
    const Complex m = 0.5 * (a + b);
    const auto left = gl16_panel<N>(f, a, m);
    const auto right = gl16_panel<N>(f, m, b);
    double err = 0.0;
    std::array<Complex, N> both{};
    for (std::size_t c = 0; c < N; ++c) {
        both[c] = left[c] + right[c];
        err = std::max(err, std::abs(both[c] - whole[c]));
    }
    if (err <= tol) return both;
    if (depth >= cfg.max_depth)
        throw IntegrationError("quadrature did not converge on segment near " +
                               std::to_string(m.real()) + (m.imag() < 0 ? "" : "+") +
                               std::to_string(m.imag()) + "i");
    const auto l = adaptive<N>(f, a, m, left, 0.5 * tol, depth + 1, cfg);
    const auto r = adaptive<N>(f, m, b, right, 0.5 * tol, depth + 1, cfg);
    for (std::size_t c = 0; c < N; ++c) both[c] = l[c] + r[c];
    return both;
}

} // namespace detail

/// Integral of N holomorphic integrands along the straight segment a -> b
/// (adaptive Gauss-Legendre order 16 with interval halving).
template <std::size_t N, class Fn>
std::array<Complex, N> integrate_segment(Fn&& f, Complex a, Complex b, const QuadConfig& cfg = {}) {
    if (a == b) return {};
    auto whole = detail::gl16_panel<N>(f, a, b);
    return detail::adaptive<N>(f, a, b, whole, cfg.abs_tol, 0, cfg);
}

// ---------------------------------------------------------------------------
// Finite differences (central, one Richardson extrapolation step)

template <class V>
struct Partials {
    V f{}, fu{}, fv{}, fuu{}, fuv{}, fvv{};
};

/// First and second partials of a map (u, v) -> V, accurate to O(step^4).
template <class V, class Fn>
Partials<V> partials(Fn&& f, double u, double v, double step) {
    auto level = [&](double h) {
        const V c = f(u, v);
        const V pu = f(u + h, v), mu = f(u - h, v);
        const V pv = f(u, v + h), mv = f(u, v - h);
        const V pp = f(u + h, v + h), pm = f(u + h, v - h);
        const V mp = f(u - h, v + h), mm = f(u - h, v - h);
        Partials<V> p;
        p.f = c;
        p.fu = (pu - mu) * (0.5 / h);
        p.fv = (pv - mv) * (0.5 / h);
        p.fuu = (pu - c * 2.0 + mu) * (1.0 / (h * h));
        p.fvv = (pv - c * 2.0 + mv) * (1.0 / (h * h));
        p.fuv = (pp - pm - mp + mm) * (0.25 / (h * h));
        return p;
    };
    const Partials<V> a = level(step), b = level(0.5 * step);
    auto rich = [](const V& coarse, const V& fine) { return (fine * 4.0 - coarse) * (1.0 / 3.0); };
    Partials<V> r;
    r.f = a.f;
    r.fu = rich(a.fu, b.fu);
    r.fv = rich(a.fv, b.fv);
    r.fuu = rich(a.fuu, b.fuu);
    r.fvv = rich(a.fvv, b.fvv);
    r.fuv = rich(a.fuv, b.fuv);
    return r;
}

/// First partials only.
template <class V, class Fn>
std::pair<V, V> first_partials(Fn&& f, double u, double v, double step) {
    auto d = [&](double h) {
        return std::pair<V, V>{(f(u + h, v) - f(u - h, v)) * (0.5 / h),
                               (f(u, v + h) - f(u, v - h)) * (0.5 / h)};
    };
    const auto a = d(step), b = d(0.5 * step);
    return {(b.first * 4.0 - a.first) * (1.0 / 3.0), (b.second * 4.0 - a.second) * (1.0 / 3.0)};
}

/// Scalar one-variable central derivative with Richardson extrapolation.
template <class V, class Fn>
V derivative(Fn&& f, double t, double step) {
    auto d = [&](double h) { return (f(t + h) - f(t - h)) * (0.5 / h); };
    return (d(0.5 * step) * 4.0 - d(step)) * (1.0 / 3.0);
}

// ---------------------------------------------------------------------------
// Intrinsic curvature

/// Components E, F, G of a Riemannian metric on a parameter domain.
struct Metric2 {
    double E = 0.0, F = 0.0, G = 0.0;

    double det() const noexcept { return E * G - F * F; }
    Metric2 operator+(const Metric2& o) const { return {E + o.E, F + o.F, G + o.G}; }
    Metric2 operator-(const Metric2& o) const { return {E - o.E, F - o.F, G - o.G}; }
    Metric2 operator*(double s) const { return {E * s, F * s, G * s}; }
};

inline double det3(const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Gaussian curvature from the metric and its first/second partials (Brioschi).
inline double brioschi(const Partials<Metric2>& m) {
    const double E = m.f.E, F = m.f.F, G = m.f.G;
    const double Eu = m.fu.E, Ev = m.fv.E, Fu = m.fu.F, Fv = m.fv.F, Gu = m.fu.G, Gv = m.fv.G;
    const double Evv = m.fvv.E, Fuv = m.fuv.F, Guu = m.fuu.G;
    const std::array<std::array<double, 3>, 3> a{{{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                                                  {Fv - 0.5 * Gu, E, F},
                                                  {0.5 * Gv, F, G}}};
    const std::array<std::array<double, 3>, 3> b{{{0.0, 0.5 * Ev, 0.5 * Gu}, {0.5 * Ev, E, F}, {0.5 * Gu, F, G}}};
    const double d = E * G - F * F;
    return (det3(a) - det3(b)) / (d * d);
}

/// Brioschi curvature of a sampled metric field; `step` is the differencing
/// step of the metric samples.
template <class MetricFn>
double brioschi_curvature(MetricFn&& metric, double u, double v, double step) {
    return brioschi(partials<Metric2>(metric, u, v, step));
}

// ---------------------------------------------------------------------------
// Deterministic parallel loop

/// Worker count: DMIN_THREADS when set (>= 1), else the hardware concurrency.
inline unsigned thread_count() {
    if (const char* env = std::getenv("DMIN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(k) for k in [0, n). Each index is handled by exactly one worker;
/// callers write into per-index slots and reduce afterwards in index order.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
    if (workers <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    // A worker stops at its first failure, so the smallest failing index over
    // all workers is the smallest failing index overall.
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::size_t> failed_at(workers, n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            std::size_t k = w;
            try {
                for (; k < n; k += workers) fn(k);
            } catch (...) {
                errors[w] = std::current_exception();
                failed_at[w] = k;
            }
        });
    }
    for (auto& t : pool) t.join();
    const auto first = std::min_element(failed_at.begin(), failed_at.end()) - failed_at.begin();
    if (errors[first]) std::rethrow_exception(errors[first]);
}

} // namespace dmin
