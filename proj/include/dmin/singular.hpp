#pragma once

// Isolated singular points of Weierstrass-generated surfaces. The metric is
// |F|^2 (du^2 + dv^2), so singular points are the zeros of F; the Jacobian
// rank there is 1 when G(w) != 0 and 0 when G vanishes as well.

#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/numeric.hpp"
#include "dmin/weierstrass.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace dmin {

struct ZeroCandidate {
    Complex w{};
    bool refined = false;  ///< Newton converged to |F| <= tol
};

namespace detail {

struct NewtonResult {
    Complex w{};
    bool converged = false;
};

inline NewtonResult newton(const Expr& F, const Expr& dF, Complex w, double tol, int max_iter = 500) {
    try {
        for (int it = 0; it < max_iter; ++it) {
            const Complex f = eval(F, w);
            if (f == Complex(0.0)) return {w, true};
            const Complex d = eval(dF, w);
            if (d == Complex(0.0)) break;
            const Complex step = f / d;
            w -= step;
            if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return {w, false};
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(w))) break;
        }
        return {w, std::abs(eval(F, w)) <= tol};
    } catch (const EvalError&) {
        return {w, false};
    }
}

} // namespace detail

/// Zeros of `F` in `domain`: candidates from a grid scan (cells with non-zero
/// winding number, near-zero nodes, interior local minima of |F|) refined by
/// Newton. Refined zeros closer than 10*tol, or joined by a segment whose
/// midpoint still has |F| <= tol, are merged. Winding cells whose Newton run
/// fails are kept as unrefined candidates.
inline std::vector<ZeroCandidate> find_zeros(const Expr& F, const Rect& domain, const GridSpec& grid = {},
                                             double tol = 1e-10) {
    if (!grid.valid()) throw std::invalid_argument("find_zeros: grid must be at least 2x2");
    const Expr dF = differentiate(F);
    struct Start {
        Complex w;
        bool from_winding;
    };
    std::vector<Start> starts;

    std::vector<double> mod(grid.size(), std::numeric_limits<double>::infinity());
    for (int j = 0; j < grid.nv; ++j)
        for (int i = 0; i < grid.nu; ++i) {
            auto [u, v] = grid_node(domain, grid, i, j);
            try {
                mod[static_cast<std::size_t>(j) * grid.nu + i] = std::abs(eval(F, Complex(u, v)));
            } catch (const EvalError&) {
            }
        }
    auto at = [&](int i, int j) { return mod[static_cast<std::size_t>(j) * grid.nu + i]; };

    for (int j = 0; j < grid.nv; ++j)
        for (int i = 0; i < grid.nu; ++i) {
            auto [u, v] = grid_node(domain, grid, i, j);
            const double m = at(i, j);
            if (m <= tol) {
                starts.push_back({{u, v}, false});
                continue;
            }
            if (i == 0 || j == 0 || i == grid.nu - 1 || j == grid.nv - 1) continue;
            bool local_min = std::isfinite(m);
            for (int dj = -1; dj <= 1 && local_min; ++dj)
                for (int di = -1; di <= 1; ++di)
                    if ((di || dj) && at(i + di, j + dj) < m) {
                        local_min = false;
                        break;
                    }
            if (local_min) starts.push_back({{u, v}, false});
        }
    for (int j = 0; j + 1 < grid.nv; ++j)
        for (int i = 0; i + 1 < grid.nu; ++i) {
            auto [ua, va] = grid_node(domain, grid, i, j);
            auto [ub, vb] = grid_node(domain, grid, i + 1, j + 1);
            const auto wn = cell_winding_number(F, Rect{ua, ub, va, vb});
            if (wn && *wn > 0) starts.push_back({{0.5 * (ua + ub), 0.5 * (va + vb)}, true});
        }

    const double slack = 1e-12 * std::max(domain.width(), domain.height());
    std::vector<ZeroCandidate> found;
    for (const Start& s : starts) {
        const auto r = detail::newton(F, dF, s.w, tol);
        if (r.converged && domain.contains(r.w, slack)) {
            found.push_back({r.w, true});
        } else if (s.from_winding) {
            found.push_back({s.w, false});
        }
    }

    auto same_zero = [&](const ZeroCandidate& a, const ZeroCandidate& b) {
        if (std::abs(a.w - b.w) < 10.0 * tol) return true;
        if (!a.refined || !b.refined) return false;
        try {
            return std::abs(eval(F, 0.5 * (a.w + b.w))) <= tol;
        } catch (const EvalError&) {
            return false;
        }
    };
    std::vector<ZeroCandidate> merged;
    // Refined candidates first so an unrefined duplicate never displaces a refined one.
    std::stable_sort(found.begin(), found.end(),
                     [](const ZeroCandidate& a, const ZeroCandidate& b) { return a.refined > b.refined; });
    for (const auto& c : found) {
        bool dup = false;
        for (const auto& m : merged)
            if (same_zero(c, m) || (!c.refined && std::abs(c.w - m.w) < 2.0 * std::max(domain.width() / (grid.nu - 1),
                                                                                         domain.height() / (grid.nv - 1)))) {
                dup = true;
                break;
            }
        if (!dup) merged.push_back(c);
    }
    std::sort(merged.begin(), merged.end(), [](const ZeroCandidate& a, const ZeroCandidate& b) {
        const double ra = std::abs(a.w), rb = std::abs(b.w);
        if (ra != rb) return ra < rb;
        return std::arg(a.w) < std::arg(b.w);
    });
    return merged;
}

/// Order of the zero of `F` inside the circle |w - w0| = radius, by the
/// argument principle (1/2 pi i) \oint F'/F dw with the trapezoidal rule.
inline int zero_multiplicity(const Expr& F, Complex w0, double radius, int samples = 256) {
    if (!(radius > 0.0) || samples < 8) throw std::invalid_argument("zero_multiplicity: bad radius or sample count");
    const Expr dF = differentiate(F);
    Complex sum = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Complex offset = std::polar(radius, 2.0 * std::numbers::pi * k / samples);
        const Complex w = w0 + offset;
        Complex f, d;
        try {
            f = eval(F, w);
            d = eval(dF, w);
        } catch (const EvalError& e) {
            throw ContourError(std::string("zero_multiplicity: evaluation failed on the contour: ") + e.what());
        }
        if (std::abs(f) < 1e-300) throw ContourError("zero_multiplicity: contour passes through a zero");
        sum += d / f * offset;
    }
    sum /= static_cast<double>(samples);
    const double n = std::round(sum.real());
    if (std::abs(sum.real() - n) > 0.1 || std::abs(sum.imag()) > 0.1)
        throw ContourError("zero_multiplicity: non-integer winding " + std::to_string(sum.real()) + "+" +
                           std::to_string(sum.imag()) + "i");
    return static_cast<int>(n);
}

struct RankInfo {
    int analytic = 2;
    int numeric = 2;
    double sigma_max = 0.0, sigma_min = 0.0;  ///< singular values of the 2x3 Jacobian (finite differences)
};

/// Jacobian rank of f = Re \int (F, -iF, G) at w0. Analytic: 2 if |F| > tol,
/// 1 if |F| <= tol < |G|, 0 otherwise. Cross-checked against the singular
/// values of the finite-difference Jacobian (sigma_min = |F|,
/// sigma_max = sqrt(|F|^2 + |G|^2)); an unambiguous disagreement throws
/// ConsistencyError.
inline RankInfo jacobian_rank_info(const WeierstrassData& data, Complex w0, double tol = 1e-10) {
    const double aF = std::abs(eval(data.F, w0)), aG = std::abs(eval(data.G, w0));
    RankInfo r;
    r.analytic = aF > tol ? 2 : (aG > tol ? 1 : 0);

    const auto surf = weierstrass_surface(data);
    const double h = default_step(data.domain);
    auto f = [&](double u, double v) { return (*surf)(u, v); };
    const auto [fu, fv] = first_partials<Vec021>(f, w0.real(), w0.imag(), h);
    const double a = fu.x * fu.x + fu.y * fu.y + fu.z * fu.z;
    const double b = fu.x * fv.x + fu.y * fv.y + fu.z * fv.z;
    const double c = fv.x * fv.x + fv.y * fv.y + fv.z * fv.z;
    const double mean = 0.5 * (a + c), disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    r.sigma_max = std::sqrt(std::max(0.0, mean + disc));
    r.sigma_min = std::sqrt(std::max(0.0, mean - disc));

    // Finite-difference error band around the rank threshold.
    const double band = 1e-7 * (1.0 + r.sigma_max);
    int numeric = 0;
    bool ambiguous = false;
    for (double s : {r.sigma_max, r.sigma_min}) {
        if (std::abs(s - tol) <= band) ambiguous = true;
        if (s > tol) ++numeric;
    }
    r.numeric = ambiguous ? r.analytic : numeric;
    if (r.numeric != r.analytic)
        throw ConsistencyError("jacobian rank mismatch at " + std::to_string(w0.real()) + "+" +
                               std::to_string(w0.imag()) + "i: analytic " + std::to_string(r.analytic) +
                               ", numeric " + std::to_string(numeric));
    return r;
}

inline int jacobian_rank_at(const WeierstrassData& data, Complex w0, double tol = 1e-10) {
    return jacobian_rank_info(data, w0, tol).analytic;
}

struct SingularPoint {
    Complex w{};
    int multiplicity = 1;
    int rank = 1;
    bool refined = true;
    bool g_vanishes = false;
};

struct SingularOptions {
    GridSpec grid{64, 64};
    double tol = 1e-10;
    int contour_samples = 256;
    double tie_band = 1e-6;  ///< |G| below this triggers a separate refinement of G's zero
};

/// Zeros of F with multiplicity and Jacobian rank, sorted by |w|.
inline std::vector<SingularPoint> singular_report(const WeierstrassData& data, const Rect& domain,
                                                  const SingularOptions& opt = {}) {
    const auto zeros = find_zeros(data.F, domain, opt.grid, opt.tol);
    std::vector<SingularPoint> out;
    const Expr dG = differentiate(data.G);
    for (std::size_t k = 0; k < zeros.size(); ++k) {
        const Complex w = zeros[k].w;
        double radius = 0.9 * domain.distance_to_boundary(w);
        for (std::size_t m = 0; m < zeros.size(); ++m)
            if (m != k) radius = std::min(radius, 0.5 * std::abs(zeros[m].w - w));
        radius = std::min(radius, 0.25 * std::max(domain.width(), domain.height()));
        if (!(radius > 0.0)) radius = 1e-3 * std::max(domain.width(), domain.height());

        SingularPoint p;
        p.w = w;
        p.refined = zeros[k].refined;
        p.multiplicity = zero_multiplicity(data.F, w, radius, opt.contour_samples);

        const double aG = std::abs(eval(data.G, w));
        p.g_vanishes = aG <= opt.tol;
        if (!p.g_vanishes && aG <= opt.tie_band) {
            const auto g0 = detail::newton(data.G, dG, w, opt.tol);
            p.g_vanishes = g0.converged && std::abs(g0.w - w) <= 10.0 * opt.tol;
        }
        p.rank = p.g_vanishes ? 0 : 1;
        if (p.refined) {
            const RankInfo info = jacobian_rank_info(data, w, opt.tol);
            if (info.analytic == 2)
                throw ConsistencyError("refined zero of F has full Jacobian rank");
            if (!p.g_vanishes || info.analytic == 0) p.rank = info.analytic;
        }
        out.push_back(p);
    }
    return out;
}

inline std::vector<SingularPoint> singular_report(const WeierstrassData& data, const SingularOptions& opt = {}) {
    return singular_report(data, data.domain, opt);
}

} // namespace dmin
