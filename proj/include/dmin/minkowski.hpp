#pragma once

// Surfaces in Minkowski 4-space with metric -dx1^2 + dx2^2 + dx3^2 + dx4^2,
// the embedding (x, y, z) -> (z, x, y, z) of R^{0,2,1} into the slice
// {x1 = x4}, and the flat zero-mean-curvature check.

#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/geometry.hpp"
#include "dmin/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace dmin {

struct Vec4M {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0, x4 = 0.0;

    Vec4M operator+(const Vec4M& o) const { return {x1 + o.x1, x2 + o.x2, x3 + o.x3, x4 + o.x4}; }
    Vec4M operator-(const Vec4M& o) const { return {x1 - o.x1, x2 - o.x2, x3 - o.x3, x4 - o.x4}; }
    Vec4M operator*(double s) const { return {x1 * s, x2 * s, x3 * s, x4 * s}; }
    bool operator==(const Vec4M&) const = default;
};

inline double lorentz_inner(const Vec4M& a, const Vec4M& b) {
    return -a.x1 * b.x1 + a.x2 * b.x2 + a.x3 * b.x3 + a.x4 * b.x4;
}

inline double sup_norm(const Vec4M& a) {
    return std::max({std::abs(a.x1), std::abs(a.x2), std::abs(a.x3), std::abs(a.x4)});
}

inline Vec4M iota_embed(const Vec021& p) { return {p.z, p.x, p.y, p.z}; }

class MinkSurface {
public:
    using Evaluator = std::function<Vec4M(double, double)>;

    MinkSurface(Evaluator f, Rect domain) : f_(std::move(f)), domain_(domain) {
        if (!domain_.valid()) throw std::invalid_argument("MinkSurface: empty domain");
    }

    Vec4M operator()(double u, double v) const { return f_(u, v); }
    const Rect& domain() const noexcept { return domain_; }
    const Evaluator& evaluator() const noexcept { return f_; }

private:
    Evaluator f_;
    Rect domain_;
};

/// The image of a patch under the embedding, on the same parameter domain.
inline MinkSurface embed(const SurfacePatch& s) {
    return MinkSurface([f = s.evaluator()](double u, double v) { return iota_embed(f(u, v)); }, s.domain());
}

/// Surface from four real expressions in u, v.
inline MinkSurface mink_from_exprs(std::string_view x1, std::string_view x2, std::string_view x3,
                                   std::string_view x4, Rect domain) {
    std::array<Expr, 4> e{parse_real_expr(x1), parse_real_expr(x2), parse_real_expr(x3), parse_real_expr(x4)};
    return MinkSurface(
        [e](double u, double v) {
            return Vec4M{eval_real(e[0], u, v), eval_real(e[1], u, v), eval_real(e[2], u, v), eval_real(e[3], u, v)};
        },
        domain);
}

namespace detail {

struct Gram {
    double g11, g12, g22;
    double det() const { return g11 * g22 - g12 * g12; }
};

inline Gram spacelike_gram(const Vec4M& fu, const Vec4M& fv, double u, double v) {
    const Gram g{lorentz_inner(fu, fu), lorentz_inner(fu, fv), lorentz_inner(fv, fv)};
    if (!(g.g11 > 1e-10) || !(g.det() > 1e-10))
        throw NonSpacelikeError("induced metric not positive definite at (" + std::to_string(u) + ", " +
                                std::to_string(v) + ")");
    return g;
}

} // namespace detail

/// Mean curvature vector (1/2) tr_g of the normal part of the second
/// derivatives; the tangential part is removed via the Gram system.
inline Vec4M mean_curvature_vector(const MinkSurface& s, double u, double v, double step) {
    detail::require_interior(s.domain(), u, v, 2.0 * step, "mean_curvature_vector");
    const auto p = partials<Vec4M>(s.evaluator(), u, v, step);
    const auto g = detail::spacelike_gram(p.fu, p.fv, u, v);
    const double d = g.det();
    auto normal = [&](const Vec4M& w) {
        const double ru = lorentz_inner(w, p.fu), rv = lorentz_inner(w, p.fv);
        const double a = (g.g22 * ru - g.g12 * rv) / d, b = (g.g11 * rv - g.g12 * ru) / d;
        return w - p.fu * a - p.fv * b;
    };
    // Inverse metric entries.
    const double i11 = g.g22 / d, i12 = -g.g12 / d, i22 = g.g11 / d;
    return (normal(p.fuu) * i11 + normal(p.fuv) * (2.0 * i12) + normal(p.fvv) * i22) * 0.5;
}

/// Gaussian curvature of the induced metric (Brioschi; the metric is sampled
/// with first differences of size `step` and differenced again with 100*step).
inline double gaussian_curvature_induced(const MinkSurface& s, double u, double v, double step) {
    const double outer = 100.0 * step;
    detail::require_interior(s.domain(), u, v, outer + 2.0 * step, "gaussian_curvature_induced");
    auto metric = [&](double a, double b) {
        const auto [fu, fv] = first_partials<Vec4M>(s.evaluator(), a, b, step);
        const auto g = detail::spacelike_gram(fu, fv, a, b);
        return Metric2{g.g11, g.g12, g.g22};
    };
    return brioschi_curvature(metric, u, v, outer);
}

struct FlatZmcReport {
    double max_H = 0.0;  ///< max sup-norm of the mean curvature vector
    double max_K = 0.0;  ///< max |K| of the induced metric
    std::vector<std::pair<double, double>> violations;  ///< non-spacelike samples
    int samples = 0;
    bool pass = false;
};

struct FlatZmcOptions {
    GridSpec grid{16, 16};
    double tol = 1e-5;
    double step = 0.0;  ///< 0 selects default_step(domain)
};

/// Samples an interior grid (inset by 102 steps so the curvature stencil
/// fits) and reports the maxima; pass iff both are <= tol and every sample is
/// spacelike.
inline FlatZmcReport verify_flat_zmc(const MinkSurface& s, const FlatZmcOptions& opt = {}) {
    if (!opt.grid.valid()) throw std::invalid_argument("verify_flat_zmc: grid must be at least 2x2");
    const double step = opt.step > 0.0 ? opt.step : default_step(s.domain());
    const Rect inner = s.domain().inset(102.0 * step);
    if (!inner.valid()) throw std::invalid_argument("verify_flat_zmc: domain too small for the curvature stencil");
    struct Slot {
        double H = 0.0, K = 0.0;
        bool bad = false;
    };
    std::vector<Slot> slots(opt.grid.size());
    parallel_for(slots.size(), [&](std::size_t k) {
        auto [u, v] = grid_node(inner, opt.grid, static_cast<int>(k % opt.grid.nu), static_cast<int>(k / opt.grid.nu));
        try {
            slots[k].H = sup_norm(mean_curvature_vector(s, u, v, step));
            slots[k].K = std::abs(gaussian_curvature_induced(s, u, v, step));
        } catch (const NonSpacelikeError&) {
            slots[k].bad = true;
        }
    });
    FlatZmcReport rep;
    rep.samples = static_cast<int>(slots.size());
    for (std::size_t k = 0; k < slots.size(); ++k) {
        if (slots[k].bad) {
            rep.violations.push_back(
                grid_node(inner, opt.grid, static_cast<int>(k % opt.grid.nu), static_cast<int>(k / opt.grid.nu)));
            continue;
        }
        rep.max_H = std::max(rep.max_H, slots[k].H);
        rep.max_K = std::max(rep.max_K, slots[k].K);
    }
    rep.pass = rep.violations.empty() && rep.max_H <= opt.tol && rep.max_K <= opt.tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Vanishing locus of h

struct LocusCluster {
    double u = 0.0, v = 0.0;  ///< centroid of the member nodes
    int size = 0;
    bool isolated = false;
};

struct LocusReport {
    std::vector<LocusCluster> clusters;
    int flagged_nodes = 0;
    int degenerate_nodes = 0;

    bool all_isolated() const {
        return std::all_of(clusters.begin(), clusters.end(), [](const LocusCluster& c) { return c.isolated; });
    }
};

struct LocusOptions {
    GridSpec grid{33, 33};
    double tol = 1e-6;
    double step = 0.0;
    int max_extent = 2;  ///< cells; larger clusters are not isolated
    int separation = 5;  ///< cells; closer clusters are not isolated
};

/// Grid nodes with sup |h| < tol, clustered by 8-neighbourhood. A cluster is
/// isolated if it spans at most max_extent cells and no other cluster comes
/// within `separation` cells; anything else suggests a totally geodesic region.
inline LocusReport vanishing_h_locus(const SurfacePatch& s, const LocusOptions& opt = {}) {
    if (!opt.grid.valid()) throw std::invalid_argument("vanishing_h_locus: grid must be at least 2x2");
    const double step = opt.step > 0.0 ? opt.step : default_step(s.domain());
    const Rect inner = s.domain().inset(4.0 * step);
    const int nu = opt.grid.nu, nv = opt.grid.nv;
    std::vector<int> state(opt.grid.size(), 0);  // 0 regular, 1 flagged, 2 degenerate
    parallel_for(state.size(), [&](std::size_t k) {
        auto [u, v] = grid_node(inner, opt.grid, static_cast<int>(k % nu), static_cast<int>(k / nu));
        try {
            state[k] = fundamental_forms(s, u, v, step).h_sup() < opt.tol ? 1 : 0;
        } catch (const DegenerateMetricError&) {
            state[k] = 2;
        }
    });

    LocusReport rep;
    struct Members {
        std::vector<std::pair<int, int>> nodes;
        int imin, imax, jmin, jmax;
    };
    std::vector<Members> found;
    std::vector<int> label(state.size(), -1);
    for (int j = 0; j < nv; ++j)
        for (int i = 0; i < nu; ++i) {
            const std::size_t k = static_cast<std::size_t>(j) * nu + i;
            rep.degenerate_nodes += state[k] == 2;
            if (state[k] != 1 || label[k] >= 0) continue;
            Members m{{}, i, i, j, j};
            std::vector<std::pair<int, int>> stack{{i, j}};
            label[k] = static_cast<int>(found.size());
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                m.nodes.push_back({a, b});
                m.imin = std::min(m.imin, a);
                m.imax = std::max(m.imax, a);
                m.jmin = std::min(m.jmin, b);
                m.jmax = std::max(m.jmax, b);
                for (int db = -1; db <= 1; ++db)
                    for (int da = -1; da <= 1; ++da) {
                        const int x = a + da, y = b + db;
                        if (x < 0 || y < 0 || x >= nu || y >= nv) continue;
                        const std::size_t q = static_cast<std::size_t>(y) * nu + x;
                        if (state[q] == 1 && label[q] < 0) {
                            label[q] = static_cast<int>(found.size());
                            stack.push_back({x, y});
                        }
                    }
            }
            found.push_back(std::move(m));
        }

    for (std::size_t c = 0; c < found.size(); ++c) {
        const Members& m = found[c];
        LocusCluster out;
        out.size = static_cast<int>(m.nodes.size());
        rep.flagged_nodes += out.size;
        for (auto [a, b] : m.nodes) {
            auto [u, v] = grid_node(inner, opt.grid, a, b);
            out.u += u / out.size;
            out.v += v / out.size;
        }
        bool isolated = m.imax - m.imin <= opt.max_extent && m.jmax - m.jmin <= opt.max_extent;
        for (std::size_t o = 0; o < found.size() && isolated; ++o) {
            if (o == c) continue;
            for (auto [a, b] : m.nodes) {
                for (auto [x, y] : found[o].nodes)
                    if (std::max(std::abs(a - x), std::abs(b - y)) <= opt.separation) {
                        isolated = false;
                        break;
                    }
                if (!isolated) break;
            }
        }
        out.isolated = isolated;
        rep.clusters.push_back(out);
    }
    return rep;
}

/// Inverse of the embedding on the slice {x1 = x4}: (x1, x2, x3, x4) -> (x2, x3, x4).
/// Every node of `check` must satisfy |x1 - x4| <= tol.
inline SurfacePatch slice_project(const MinkSurface& s, double tol = 1e-12, const GridSpec& check = {33, 33}) {
    double worst = -1.0, wu = 0.0, wv = 0.0;
    for (int j = 0; j < check.nv; ++j)
        for (int i = 0; i < check.nu; ++i) {
            auto [u, v] = grid_node(s.domain(), check, i, j);
            const Vec4M p = s(u, v);
            const double gap = std::abs(p.x1 - p.x4);
            if (!(gap <= worst)) {
                worst = gap;
                wu = u;
                wv = v;
            }
        }
    if (!(worst <= tol))
        throw NotInSliceError(wu, wv, worst, "surface leaves the slice x1 = x4 at (" + std::to_string(wu) + ", " +
                                                 std::to_string(wv) + "): gap " + std::to_string(worst));
    return SurfacePatch([f = s.evaluator()](double u, double v) {
        const Vec4M p = f(u, v);
        return Vec021{p.x2, p.x3, p.x4};
    }, s.domain(), PatchKind::closed_form);
}

} // namespace dmin
