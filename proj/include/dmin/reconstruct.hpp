#pragma once

// Graph surfaces from a prescribed second fundamental form with flat metric
// du^2 + dv^2. The Codazzi equations (h11)_v = (h12)_u, (h22)_u = (h12)_v
// make h the Hessian of a height function F, unique up to F0 + A u + B v.

#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/geometry.hpp"
#include "dmin/numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace dmin {

/// h11, h12, h22 sampled on a uniform grid (row-major, v outer, u inner).
struct FormsGrid {
    GridSpec grid;
    std::vector<double> h11, h12, h22;

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * grid.nu + i; }
};

/// Real expressions in u, v for h11, h12, h22.
struct FormsExprs {
    Expr h11, h12, h22;
};

class PrescribedForms {
public:
    PrescribedForms(FormsExprs e, Rect domain) : data_(std::move(e)), domain_(domain) { check(); }
    PrescribedForms(FormsGrid g, Rect domain) : data_(std::move(g)), domain_(domain) { check(); }

    static PrescribedForms parse(std::string_view h11, std::string_view h12, std::string_view h22,
                                 Rect domain = {}) {
        return PrescribedForms(FormsExprs{parse_real_expr(h11), parse_real_expr(h12), parse_real_expr(h22)}, domain);
    }

    const Rect& domain() const noexcept { return domain_; }
    bool is_grid() const noexcept { return std::holds_alternative<FormsGrid>(data_); }
    const FormsExprs& exprs() const { return std::get<FormsExprs>(data_); }
    const FormsGrid& samples() const { return std::get<FormsGrid>(data_); }

    /// (h11, h12, h22) at (u, v); grid inputs are interpolated (Catmull-Rom).
    std::array<double, 3> operator()(double u, double v) const {
        if (const auto* e = std::get_if<FormsExprs>(&data_))
            return {eval_real(e->h11, u, v), eval_real(e->h12, u, v), eval_real(e->h22, u, v)};
        const auto& g = std::get<FormsGrid>(data_);
        return {interp(g, g.h11, u, v), interp(g, g.h12, u, v), interp(g, g.h22, u, v)};
    }

private:
    void check() const {
        if (!domain_.valid()) throw std::invalid_argument("PrescribedForms: empty domain");
        if (const auto* g = std::get_if<FormsGrid>(&data_)) {
            if (!g->grid.valid()) throw std::invalid_argument("PrescribedForms: grid must be at least 2x2");
            for (const auto* c : {&g->h11, &g->h12, &g->h22}) {
                if (c->size() != g->grid.size()) throw std::invalid_argument("PrescribedForms: sample count mismatch");
                for (double x : *c)
                    if (!std::isfinite(x)) throw std::invalid_argument("PrescribedForms: non-finite sample");
            }
        }
    }

    // Uniform Catmull-Rom spline in each direction, clamped at the edges.
    double interp(const FormsGrid& g, const std::vector<double>& c, double u, double v) const {
        const double su = (u - domain_.u0) / domain_.width() * (g.grid.nu - 1);
        const double sv = (v - domain_.v0) / domain_.height() * (g.grid.nv - 1);
        const int iu = std::clamp(static_cast<int>(std::floor(su)), 0, g.grid.nu - 2);
        const int iv = std::clamp(static_cast<int>(std::floor(sv)), 0, g.grid.nv - 2);
        const double tu = su - iu, tv = sv - iv;
        auto at = [&](int i, int j) {
            i = std::clamp(i, 0, g.grid.nu - 1);
            j = std::clamp(j, 0, g.grid.nv - 1);
            return c[g.index(i, j)];
        };
        auto cr = [](double p0, double p1, double p2, double p3, double t) {
            return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
        };
        std::array<double, 4> col{};
        for (int r = 0; r < 4; ++r)
            col[r] = cr(at(iu - 1, iv - 1 + r), at(iu, iv - 1 + r), at(iu + 1, iv - 1 + r), at(iu + 2, iv - 1 + r), tu);
        return cr(col[0], col[1], col[2], col[3], tv);
    }

    std::variant<FormsExprs, FormsGrid> data_;
    Rect domain_;
};

/// Reads a CSV with header u,v,h11,h12,h22 whose (u, v) rows form a full
/// tensor grid (any row order).
inline PrescribedForms read_forms_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("forms CSV: empty input");
    {
        std::string h;
        for (char ch : line)
            if (!std::isspace(static_cast<unsigned char>(ch))) h += ch;
        if (h != "u,v,h11,h12,h22") throw std::invalid_argument("forms CSV: expected header u,v,h11,h12,h22");
    }
    std::map<std::pair<double, double>, std::array<double, 3>> rows;  // key (v, u)
    std::vector<double> us, vs;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::stringstream ss(line);
        std::array<double, 5> x{};
        for (int k = 0; k < 5; ++k) {
            std::string cell;
            if (!std::getline(ss, cell, ',')) throw std::invalid_argument("forms CSV: short row at line " + std::to_string(lineno));
            try {
                std::size_t used = 0;
                x[k] = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::invalid_argument("forms CSV: bad number at line " + std::to_string(lineno));
            }
        }
        rows[{x[1], x[0]}] = {x[2], x[3], x[4]};
        us.push_back(x[0]);
        vs.push_back(x[1]);
    }
    auto uniq = [](std::vector<double>& a) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    };
    uniq(us);
    uniq(vs);
    if (us.size() < 2 || vs.size() < 2 || rows.size() != us.size() * vs.size())
        throw std::invalid_argument("forms CSV: rows do not form a full grid");
    FormsGrid g;
    g.grid = {static_cast<int>(us.size()), static_cast<int>(vs.size())};
    const Rect domain{us.front(), us.back(), vs.front(), vs.back()};
    for (int j = 0; j < g.grid.nv; ++j)
        for (int i = 0; i < g.grid.nu; ++i) {
            const double eu = grid_coord(domain.u0, domain.u1, g.grid.nu, i);
            const double ev = grid_coord(domain.v0, domain.v1, g.grid.nv, j);
            const double scale = 1e-9 * std::max(domain.width(), domain.height());
            if (std::abs(us[i] - eu) > scale || std::abs(vs[j] - ev) > scale)
                throw std::invalid_argument("forms CSV: grid is not uniform");
            const auto& h = rows.at({vs[j], us[i]});
            g.h11.push_back(h[0]);
            g.h12.push_back(h[1]);
            g.h22.push_back(h[2]);
        }
    return PrescribedForms(std::move(g), domain);
}

// ---------------------------------------------------------------------------

struct CodazziReport {
    double max_residual = 0.0;
    double worst_u = 0.0, worst_v = 0.0;
    bool pass = true;
};

/// Max over the grid of |(h11)_v - (h12)_u| and |(h22)_u - (h12)_v|.
/// Expression inputs use symbolic partials at the nodes of `grid`; sampled
/// inputs use central differences at their own interior nodes.
inline CodazziReport codazzi_check(const PrescribedForms& p, const GridSpec& grid = {32, 32}, double tol = 1e-7) {
    CodazziReport rep;
    auto note = [&](double r, double u, double v) {
        if (!(r <= rep.max_residual)) {
            rep.max_residual = r;
            rep.worst_u = u;
            rep.worst_v = v;
        }
    };
    const Rect& d = p.domain();
    if (!p.is_grid()) {
        if (!grid.valid()) throw std::invalid_argument("codazzi_check: grid must be at least 2x2");
        const auto& e = p.exprs();
        const Expr h11_v = differentiate(e.h11, 1), h12_u = differentiate(e.h12, 0);
        const Expr h22_u = differentiate(e.h22, 0), h12_v = differentiate(e.h12, 1);
        for (int j = 0; j < grid.nv; ++j)
            for (int i = 0; i < grid.nu; ++i) {
                auto [u, v] = grid_node(d, grid, i, j);
                const double r = std::max(std::abs(eval_real(h11_v, u, v) - eval_real(h12_u, u, v)),
                                          std::abs(eval_real(h22_u, u, v) - eval_real(h12_v, u, v)));
                note(r, u, v);
            }
    } else {
        const auto& g = p.samples();
        if (g.grid.nu < 3 || g.grid.nv < 3) throw std::invalid_argument("codazzi_check: sampled grid needs 3x3 nodes");
        const double du = d.width() / (g.grid.nu - 1), dv = d.height() / (g.grid.nv - 1);
        for (int j = 1; j + 1 < g.grid.nv; ++j)
            for (int i = 1; i + 1 < g.grid.nu; ++i) {
                auto Du = [&](const std::vector<double>& c) {
                    return (c[g.index(i + 1, j)] - c[g.index(i - 1, j)]) / (2.0 * du);
                };
                auto Dv = [&](const std::vector<double>& c) {
                    return (c[g.index(i, j + 1)] - c[g.index(i, j - 1)]) / (2.0 * dv);
                };
                const double r = std::max(std::abs(Dv(g.h11) - Du(g.h12)), std::abs(Du(g.h22) - Dv(g.h12)));
                auto [u, v] = grid_node(d, g.grid, i, j);
                note(r, u, v);
            }
    }
    rep.pass = rep.max_residual <= tol;
    return rep;
}

/// F(base), F_u(base), F_v(base): the affine freedom of the reconstruction.
struct HeightSeed {
    double F0 = 0.0, Fu0 = 0.0, Fv0 = 0.0;
};

struct ReconstructOptions {
    Complex base{0.0, 0.0};
    HeightSeed seed{};
    double codazzi_tol = 1e-7;
    GridSpec check_grid{32, 32};  ///< nodes for the Codazzi check of expression inputs
    int panels = 4;               ///< Gauss-Legendre panels per path leg (expression inputs)
};

namespace detail {

/// Fixed composite 16-point Gauss-Legendre rule on [a, b]; smooth in a and b,
/// so finite differences of the result stay clean.
template <class Fn>
double gl_fixed(Fn&& f, double a, double b, int panels) {
    if (a == b) return 0.0;
    const auto& rule = gauss_legendre16();
    const double width = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width, mid = lo + 0.5 * width;
        double s = 0.0;
        for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
        sum += 0.5 * width * s;
    }
    return sum;
}

/// Height at (u, v) integrating along u first, then v (order_u_first), or
/// the opposite L. Uses the repeated-integral identity
/// \int_a^x \int_a^s g = \int_a^x (x - r) g(r) dr.
inline double height_on_path(const PrescribedForms& p, const ReconstructOptions& o, double u, double v,
                             bool u_first) {
    const double ub = o.base.real(), vb = o.base.imag();
    const auto& s = o.seed;
    auto H = [&](double a, double b) { return p(a, b); };
    if (u_first) {
        const double Fv_corner = s.Fv0 + gl_fixed([&](double r) { return H(r, vb)[1]; }, ub, u, o.panels);
        return s.F0 + s.Fu0 * (u - ub) + gl_fixed([&](double r) { return (u - r) * H(r, vb)[0]; }, ub, u, o.panels) +
               (v - vb) * Fv_corner + gl_fixed([&](double r) { return (v - r) * H(u, r)[2]; }, vb, v, o.panels);
    }
    const double Fu_corner = s.Fu0 + gl_fixed([&](double r) { return H(ub, r)[1]; }, vb, v, o.panels);
    return s.F0 + s.Fv0 * (v - vb) + gl_fixed([&](double r) { return (v - r) * H(ub, r)[2]; }, vb, v, o.panels) +
           (u - ub) * Fu_corner + gl_fixed([&](double r) { return (u - r) * H(r, v)[0]; }, ub, u, o.panels);
}

inline void require_codazzi(const PrescribedForms& p, const ReconstructOptions& o) {
    const auto rep = codazzi_check(p, o.check_grid, o.codazzi_tol);
    if (!rep.pass)
        throw CodazziError(rep.max_residual, "Codazzi equations fail: residual " + std::to_string(rep.max_residual) +
                                                 " at (" + std::to_string(rep.worst_u) + ", " +
                                                 std::to_string(rep.worst_v) + ")");
}

} // namespace detail

/// Height samples on a grid over the forms' domain (row-major, v outer).
struct HeightGrid {
    Rect domain;
    GridSpec grid;
    std::vector<double> F;
    double path_discrepancy = 0.0;  ///< max |F_u-first - F_v-first|
};

/// Integrates h to the height function F with F_uu = h11, F_uv = h12,
/// F_vv = h22 and the seed values at the base point, along both L-shaped path
/// orders. Throws CodazziError when the Codazzi check fails or when the two
/// orders disagree by more than 10 * codazzi_tol.
inline HeightGrid integrate_hessian(const PrescribedForms& p, const GridSpec& grid, const ReconstructOptions& o = {}) {
    if (!grid.valid()) throw std::invalid_argument("integrate_hessian: grid must be at least 2x2");
    if (!p.domain().contains(o.base)) throw std::invalid_argument("integrate_hessian: base point outside domain");
    detail::require_codazzi(p, o);
    HeightGrid out{p.domain(), grid, std::vector<double>(grid.size()), 0.0};
    std::vector<double> other(grid.size());

    if (!p.is_grid()) {
        parallel_for(grid.size(), [&](std::size_t k) {
            auto [u, v] = grid_node(p.domain(), grid, static_cast<int>(k % grid.nu), static_cast<int>(k / grid.nu));
            out.F[k] = detail::height_on_path(p, o, u, v, true);
            other[k] = detail::height_on_path(p, o, u, v, false);
        });
    } else {
        // Trapezoid rule on the sample grid itself; the base must be a node.
        const auto& g = p.samples();
        if (grid.nu != g.grid.nu || grid.nv != g.grid.nv)
            throw std::invalid_argument("integrate_hessian: sampled forms integrate on their own grid");
        const Rect& d = p.domain();
        const double du = d.width() / (g.grid.nu - 1), dv = d.height() / (g.grid.nv - 1);
        const int ib = static_cast<int>(std::lround((o.base.real() - d.u0) / du));
        const int jb = static_cast<int>(std::lround((o.base.imag() - d.v0) / dv));
        if (std::abs(d.u0 + ib * du - o.base.real()) > 1e-9 * du || std::abs(d.v0 + jb * dv - o.base.imag()) > 1e-9 * dv)
            throw std::invalid_argument("integrate_hessian: base must be a grid node for sampled forms");
        const int nu = g.grid.nu, nv = g.grid.nv;

        // Integrates along one grid line starting at index b: second-derivative
        // samples dd, first-derivative samples d1 (filled), values f (filled).
        auto line = [](int n, int b, double h, double f0, double d0, auto dd, auto d1, auto f) {
            d1(b) = d0;
            f(b) = f0;
            for (int k = b + 1; k < n; ++k) {
                d1(k) = d1(k - 1) + 0.5 * h * (dd(k - 1) + dd(k));
                f(k) = f(k - 1) + 0.5 * h * (d1(k - 1) + d1(k));
            }
            for (int k = b - 1; k >= 0; --k) {
                d1(k) = d1(k + 1) - 0.5 * h * (dd(k + 1) + dd(k));
                f(k) = f(k + 1) - 0.5 * h * (d1(k + 1) + d1(k));
            }
        };
        auto solve = [&](bool u_first, std::vector<double>& F) {
            std::vector<double> Fu(grid.size()), Fv(grid.size());
            auto ix = [&](int i, int j) { return g.index(i, j); };
            if (u_first) {
                // Base row: F_u from h11, F_v from h12.
                std::vector<double> tmp(nu);
                line(nu, ib, du, o.seed.F0, o.seed.Fu0, [&](int i) -> double { return g.h11[ix(i, jb)]; },
                     [&](int i) -> double& { return Fu[ix(i, jb)]; }, [&](int i) -> double& { return F[ix(i, jb)]; });
                line(nu, ib, du, 0.0, o.seed.Fv0, [&](int i) -> double { return g.h12[ix(i, jb)]; },
                     [&](int i) -> double& { return Fv[ix(i, jb)]; }, [&](int i) -> double& { return tmp[i]; });
                parallel_for(nu, [&](std::size_t ii) {
                    const int i = static_cast<int>(ii);
                    line(nv, jb, dv, F[ix(i, jb)], Fv[ix(i, jb)], [&](int j) -> double { return g.h22[ix(i, j)]; },
                         [&](int j) -> double& { return Fv[ix(i, j)]; }, [&](int j) -> double& { return F[ix(i, j)]; });
                });
            } else {
                std::vector<double> tmp(nv);
                line(nv, jb, dv, o.seed.F0, o.seed.Fv0, [&](int j) -> double { return g.h22[ix(ib, j)]; },
                     [&](int j) -> double& { return Fv[ix(ib, j)]; }, [&](int j) -> double& { return F[ix(ib, j)]; });
                line(nv, jb, dv, 0.0, o.seed.Fu0, [&](int j) -> double { return g.h12[ix(ib, j)]; },
                     [&](int j) -> double& { return Fu[ix(ib, j)]; }, [&](int j) -> double& { return tmp[j]; });
                parallel_for(nv, [&](std::size_t jj) {
                    const int j = static_cast<int>(jj);
                    line(nu, ib, du, F[ix(ib, j)], Fu[ix(ib, j)], [&](int i) -> double { return g.h11[ix(i, j)]; },
                         [&](int i) -> double& { return Fu[ix(i, j)]; }, [&](int i) -> double& { return F[ix(i, j)]; });
                });
            }
        };
        solve(true, out.F);
        solve(false, other);
    }
    for (std::size_t k = 0; k < grid.size(); ++k)
        out.path_discrepancy = std::max(out.path_discrepancy, std::abs(out.F[k] - other[k]));
    // Sampled inputs carry trapezoid error in both orders; allow it to scale with the grid.
    double allowed = 10.0 * o.codazzi_tol;
    if (p.is_grid()) {
        const double h = std::max(p.domain().width() / (grid.nu - 1), p.domain().height() / (grid.nv - 1));
        double hmax = 0.0;
        const auto& g = p.samples();
        for (const auto* c : {&g.h11, &g.h12, &g.h22})
            for (double x : *c) hmax = std::max(hmax, std::abs(x));
        const double extent = std::max(p.domain().width(), p.domain().height());
        allowed += h * h * extent * extent * (1.0 + hmax);
    }
    if (out.path_discrepancy > allowed)
        throw CodazziError(out.path_discrepancy, "path orders disagree by " + std::to_string(out.path_discrepancy));
    return out;
}

/// Graph patch (u, v, F(u, v)) realizing the prescribed forms. Expression
/// inputs evaluate F on demand by quadrature along the u-first path; sampled
/// inputs interpolate the trapezoid heights (Catmull-Rom).
inline SurfacePatch surface_from_forms(const PrescribedForms& p, const ReconstructOptions& o = {}) {
    if (!p.domain().contains(o.base)) throw std::invalid_argument("surface_from_forms: base point outside domain");
    if (!p.is_grid()) {
        detail::require_codazzi(p, o);
        auto shared = std::make_shared<const PrescribedForms>(p);
        return graph_patch([shared, o](double u, double v) { return detail::height_on_path(*shared, o, u, v, true); },
                           p.domain());
    }
    const HeightGrid hg = integrate_hessian(p, p.samples().grid, o);
    FormsGrid g{hg.grid, hg.F, hg.F, hg.F};
    auto heights = std::make_shared<const PrescribedForms>(std::move(g), hg.domain);
    return graph_patch([heights](double u, double v) { return (*heights)(u, v)[0]; }, hg.domain);
}

} // namespace dmin
