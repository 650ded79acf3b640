#pragma once

// Named closed-form surfaces with their expected geometric flags, plus the
// profile ODE of rotational d-minimal surfaces.

#include "dmin/error.hpp"
#include "dmin/geometry.hpp"
#include "dmin/numeric.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace dmin {

struct ExpectedFlags {
    bool is_d_minimal = false;
    bool is_umbilical = false;  ///< h = c g with c constant (c = 0 allowed)
    int K_sign = 0;             ///< sign of the relative Gaussian curvature away from isolated points
};

struct CatalogEntry {
    std::string name;
    SurfacePatch patch;
    ExpectedFlags expected;
    GridSpec sampling{10, 10};  ///< canonical test sampling (100 points)
};

namespace catalog {

inline const std::vector<std::string>& names() {
    static const std::vector<std::string> n{"plane",       "paraboloid",     "helicoid2",        "hyp_paraboloid_uv",
                                            "hyp_paraboloid_diff", "rotational_log", "dlambda_geodesic", "cubic_harmonic"};
    return n;
}

/// Height of the d^lambda totally geodesic graph (1/lambda) log|lambda u + 1| - u - v.
inline double dlambda_height(double lambda, double u, double v) {
    return std::log(std::abs(lambda * u + 1.0)) / lambda - u - v;
}

/// Entry by name; `lambda` is used by dlambda_geodesic only. The name may
/// also carry the parameter inline, as in "dlambda_geodesic(0.5)".
inline CatalogEntry get(std::string_view name, double lambda = 1.0) {
    std::string base(name);
    if (auto open = name.find('('); open != std::string_view::npos && name.back() == ')') {
        base = std::string(name.substr(0, open));
        const std::string_view arg = name.substr(open + 1, name.size() - open - 2);
        const auto r = std::from_chars(arg.data(), arg.data() + arg.size(), lambda);
        if (r.ec != std::errc() || r.ptr != arg.data() + arg.size() || base != "dlambda_geodesic")
            throw UnknownNameError("unknown catalog entry: " + std::string(name));
    }
    const double pi = std::numbers::pi;
    if (base == "plane")
        return {base, graph_patch([](double u, double v) { return 0.5 * u - 0.25 * v; }, {-1, 1, -1, 1}),
                {true, true, 0}};
    if (base == "paraboloid")
        return {base, graph_patch([](double u, double v) { return u * u + v * v; }, {-1, 1, -1, 1}), {false, true, 1}};
    if (base == "helicoid2")
        return {base,
                SurfacePatch([](double u, double v) { return Vec021{v * std::cos(u), v * std::sin(u), u}; },
                             {-pi, pi, 0.5, 2.0}, PatchKind::closed_form),
                {true, false, -1}};
    if (base == "hyp_paraboloid_uv")
        return {base, graph_patch([](double u, double v) { return u * v; }, {-1, 1, -1, 1}), {true, false, -1}};
    if (base == "hyp_paraboloid_diff")
        return {base, graph_patch([](double u, double v) { return 0.5 * (u * u - v * v); }, {-1, 1, -1, 1}),
                {true, false, -1}};
    if (base == "rotational_log")
        return {base,
                SurfacePatch(
                    [](double u, double v) { return Vec021{std::exp(u) * std::cos(v), std::exp(u) * std::sin(v), u}; },
                    {-1, 1, -pi, pi}, PatchKind::closed_form),
                {true, false, -1}};
    if (base == "dlambda_geodesic") {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("dlambda_geodesic: lambda must be positive");
        return {base,
                graph_patch([lambda](double u, double v) { return dlambda_height(lambda, u, v); },
                            {-1.0 / lambda + 0.1, 3.0, -1.0, 1.0}),
                {false, false, 0}};
    }
    if (base == "cubic_harmonic")
        return {base, graph_patch([](double u, double v) { return u * u * u - 3.0 * u * v * v; }, {-1, 1, -1, 1}),
                {true, false, -1}};
    throw UnknownNameError("unknown catalog entry: " + std::string(name));
}

} // namespace catalog

/// Integrates y'' = -y'/x with classical RK4 from x0 (initial data from
/// C1 log x + C2) and returns the max deviation from that closed form at the
/// step nodes.
inline double rotational_profile_check(double C1, double C2, double x0, double x1, int steps) {
    if (!(x0 > 0.0) || !(x1 > 0.0)) throw RangeError("rotational_profile_check: range must lie in (0, inf)");
    if (!(x1 > x0) || steps < 1) throw std::invalid_argument("rotational_profile_check: need x0 < x1 and steps >= 1");
    auto rhs = [](double x, double /*y*/, double p) { return std::pair<double, double>{p, -p / x}; };
    double y = C1 * std::log(x0) + C2, p = C1 / x0;
    const double h = (x1 - x0) / steps;
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double x = x0 + k * h;
        const auto [k1y, k1p] = rhs(x, y, p);
        const auto [k2y, k2p] = rhs(x + 0.5 * h, y + 0.5 * h * k1y, p + 0.5 * h * k1p);
        const auto [k3y, k3p] = rhs(x + 0.5 * h, y + 0.5 * h * k2y, p + 0.5 * h * k2p);
        const auto [k4y, k4p] = rhs(x + h, y + h * k3y, p + h * k3p);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        const double xn = k + 1 == steps ? x1 : x0 + (k + 1) * h;
        worst = std::max(worst, std::abs(y - (C1 * std::log(xn) + C2)));
    }
    return worst;
}

} // namespace dmin
