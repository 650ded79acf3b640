#pragma once

// Weierstrass-type representation of d-minimal surfaces:
//   f_theta(w) = origin + Re \int_{base}^{w} e^{-i theta} (F, -i F, G) dw,
// integrated along straight segments inside a rectangular parameter domain.

#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/geometry.hpp"
#include "dmin/numeric.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace dmin {

struct WeierstrassData {
    Expr F;
    Expr G;
    Complex base{0.0, 0.0};
    Rect domain{};
    Vec021 origin{};  ///< surface value at the base point
};

/// Angle of the associated family, reduced to [0, 2 pi).
struct FamilyAngle {
    double theta = 0.0;

    FamilyAngle() = default;
    explicit FamilyAngle(double t) : theta(std::fmod(t, 2.0 * std::numbers::pi)) {
        if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    }
    /// e^{-i theta}; exact for multiples of pi/2.
    Complex factor() const {
        const double q = theta / (0.5 * std::numbers::pi);
        if (std::abs(q - std::round(q)) < 1e-15) {
            switch (static_cast<int>(std::round(q)) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, -1.0};
            case 2: return {-1.0, 0.0};
            case 3: return {0.0, 1.0};
            }
        }
        return std::polar(1.0, -theta);
    }
};

/// Holomorphic 1-forms phi_1, phi_2, phi_3 with phi_1^2 + phi_2^2 = 0.
struct PhiTriple {
    Expr phi1, phi2, phi3;
};

namespace detail {

inline void require_segment(const Rect& domain, Complex w0, Complex w, double slack, const char* who) {
    if (!domain.contains(w0, slack) || !domain.contains(w, slack))
        throw IntegrationError(std::string(who) + ": segment leaves the declared domain");
}

template <std::size_t N>
std::array<Complex, N> integrate_exprs(const std::array<Expr, N>& exprs, Complex a, Complex b,
                                       const QuadConfig& cfg) {
    auto integrand = [&](Complex z) {
        std::array<Complex, N> out;
        for (std::size_t k = 0; k < N; ++k) {
            try {
                out[k] = eval(exprs[k], z);
            } catch (const EvalError& e) {
                throw IntegrationError(std::string("evaluation failure on integration segment: ") + e.what());
            }
        }
        return out;
    };
    return integrate_segment<N>(integrand, a, b, cfg);
}

} // namespace detail

/// \int_{w0}^{w} ast(z) dz along the straight segment.
inline Complex integrate_holomorphic(const Expr& ast, Complex w0, Complex w, const QuadConfig& quad = {}) {
    return detail::integrate_exprs<1>({ast}, w0, w, quad)[0];
}

/// Segment-integrated holomorphic map evaluated as
/// x_k = origin_k + Re sum_j coeff[k][j] * \int_{base}^{w} expr_j.
class WeierstrassSurface {
public:
    using Coeffs = std::array<std::array<Complex, 3>, 3>;

    WeierstrassSurface(std::array<Expr, 3> exprs, Coeffs coeffs, Complex base, Rect domain, Vec021 origin,
                       QuadConfig quad = {})
        : exprs_(std::move(exprs)), coeffs_(coeffs), base_(base), domain_(domain), origin_(origin), quad_(quad) {
        if (!domain_.contains(base_)) throw std::invalid_argument("Weierstrass base point outside the domain");
    }

    const Rect& domain() const noexcept { return domain_; }
    Complex base() const noexcept { return base_; }

    std::array<Complex, 3> integral(Complex from, Complex to) const {
        detail::require_segment(domain_, from, to, slack(), "WeierstrassSurface");
        return detail::integrate_exprs<3>(exprs_, from, to, quad_);
    }

    Vec021 from_integrals(const std::array<Complex, 3>& I) const {
        std::array<double, 3> x{};
        for (int k = 0; k < 3; ++k) {
            Complex s = 0.0;
            for (int j = 0; j < 3; ++j) s += coeffs_[k][j] * I[j];
            x[k] = s.real();
        }
        return Vec021{x[0], x[1], x[2]} + origin_;
    }

    Vec021 operator()(double u, double v) const { return from_integrals(integral(base_, {u, v})); }

    /// Samples on a uniform grid (row-major, v outer). Integrals are cached at
    /// each row start and advanced cell by cell along the row.
    std::vector<Vec021> sample_grid(const GridSpec& g) const {
        if (!g.valid()) throw std::invalid_argument("sample_grid: grid must be at least 2x2");
        std::vector<std::array<Complex, 3>> row_start(g.nv);
        Complex prev = base_;
        std::array<Complex, 3> acc{};
        for (int j = 0; j < g.nv; ++j) {
            auto [u, v] = grid_node(domain_, g, 0, j);
            const Complex w(u, v);
            const auto step = integral(prev, w);
            for (int c = 0; c < 3; ++c) acc[c] += step[c];
            row_start[j] = acc;
            prev = w;
        }
        std::vector<Vec021> out(g.size());
        parallel_for(static_cast<std::size_t>(g.nv), [&](std::size_t jj) {
            const int j = static_cast<int>(jj);
            std::array<Complex, 3> I = row_start[j];
            auto [u0, v] = grid_node(domain_, g, 0, j);
            Complex last(u0, v);
            out[static_cast<std::size_t>(j) * g.nu] = from_integrals(I);
            for (int i = 1; i < g.nu; ++i) {
                auto [u, vv] = grid_node(domain_, g, i, j);
                const Complex w(u, vv);
                const auto d = integral(last, w);
                for (int c = 0; c < 3; ++c) I[c] += d[c];
                out[static_cast<std::size_t>(j) * g.nu + i] = from_integrals(I);
                last = w;
            }
        });
        return out;
    }

private:
    double slack() const { return 1e-2 * std::max(domain_.width(), domain_.height()); }

    std::array<Expr, 3> exprs_;
    Coeffs coeffs_;
    Complex base_;
    Rect domain_;
    Vec021 origin_;
    QuadConfig quad_;
};

/// The associated-family member f_theta of the data as a sampled-on-demand map.
inline std::shared_ptr<const WeierstrassSurface> weierstrass_surface(const WeierstrassData& data,
                                                                     FamilyAngle theta = FamilyAngle{},
                                                                     QuadConfig quad = {}) {
    const Complex r = theta.factor();
    const Complex mi(0.0, -1.0);
    WeierstrassSurface::Coeffs c{{{r, 0.0, 0.0}, {mi * r, 0.0, 0.0}, {0.0, r, 0.0}}};
    return std::make_shared<const WeierstrassSurface>(std::array<Expr, 3>{data.F, data.G, Expr::literal(0.0)}, c,
                                                      data.base, data.domain, data.origin, quad);
}

inline SurfacePatch as_patch(std::shared_ptr<const WeierstrassSurface> s) {
    const Rect d = s->domain();
    return SurfacePatch([s](double u, double v) { return (*s)(u, v); }, d, PatchKind::weierstrass);
}

/// f_theta(w) = origin + Re \int_{base}^{w} (e^{-i theta} F, -i e^{-i theta} F, e^{-i theta} G) dw.
inline SurfacePatch surface_from_data(const WeierstrassData& data, FamilyAngle theta = FamilyAngle{},
                                      QuadConfig quad = {}) {
    return as_patch(weierstrass_surface(data, theta, quad));
}

/// Data of the associated-family member: (e^{-i theta} F, e^{-i theta} G).
inline WeierstrassData rotate(const WeierstrassData& data, FamilyAngle theta) {
    WeierstrassData out = data;
    const Expr r = Expr::literal(theta.factor());
    out.F = build::mul(r, data.F);
    out.G = build::mul(r, data.G);
    return out;
}

/// Conjugate data (-i F, -i G).
inline WeierstrassData conjugate(const WeierstrassData& data) { return rotate(data, FamilyAngle(0.5 * std::numbers::pi)); }

// ---------------------------------------------------------------------------

struct PhiValidation {
    Complex worst{};
    double worst_residual = 0.0;  ///< |phi1^2 + phi2^2| / max(1, |phi1|^2 + |phi2|^2)
    Complex min_norm_at{};
    double min_norm = 0.0;        ///< min |phi1|^2 + |phi2|^2
};

inline PhiValidation check_phi(const PhiTriple& phi, const Rect& domain, const GridSpec& grid) {
    PhiValidation r;
    r.min_norm = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.nv; ++j) {
        for (int i = 0; i < grid.nu; ++i) {
            auto [u, v] = grid_node(domain, grid, i, j);
            const Complex w(u, v);
            const Complex a = eval(phi.phi1, w), b = eval(phi.phi2, w);
            const double norm = std::norm(a) + std::norm(b);
            const double res = std::abs(a * a + b * b) / std::max(1.0, norm);
            if (res > r.worst_residual) {
                r.worst_residual = res;
                r.worst = w;
            }
            if (norm < r.min_norm) {
                r.min_norm = norm;
                r.min_norm_at = w;
            }
        }
    }
    return r;
}

/// x_k = Re \int phi_k. Rejects data violating phi1^2 + phi2^2 = 0 or with
/// vanishing |phi1|^2 + |phi2|^2 on the validation grid.
inline SurfacePatch surface_from_phi(const PhiTriple& phi, Complex base, Rect domain, Vec021 origin = {},
                                     GridSpec validation = {16, 16}, double tol = 1e-10) {
    const PhiValidation check = check_phi(phi, domain, validation);
    if (check.worst_residual > tol)
        throw Data2ViolationError(check.worst, check.worst_residual,
                                  "phi1^2 + phi2^2 != 0: residual " + std::to_string(check.worst_residual) +
                                      " at " + std::to_string(check.worst.real()) + "+" +
                                      std::to_string(check.worst.imag()) + "i");
    if (!(check.min_norm > 0.0))
        throw Data2ViolationError(check.min_norm_at, 0.0, "|phi1|^2 + |phi2|^2 vanishes on the validation grid");
    WeierstrassSurface::Coeffs id{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
    return as_patch(std::make_shared<const WeierstrassSurface>(std::array<Expr, 3>{phi.phi1, phi.phi2, phi.phi3}, id,
                                                               base, domain, origin));
}

// ---------------------------------------------------------------------------
// Data validation

/// Winding number of `F` around the boundary of `cell`, or nullopt if the
/// contour passes through (or numerically onto) a zero or cannot be evaluated.
inline std::optional<int> cell_winding_number(const Expr& F, const Rect& cell, int per_edge = 8) {
    const std::array<Complex, 5> corners{Complex(cell.u0, cell.v0), Complex(cell.u1, cell.v0),
                                         Complex(cell.u1, cell.v1), Complex(cell.u0, cell.v1),
                                         Complex(cell.u0, cell.v0)};
    double total = 0.0;
    try {
        Complex prev = eval(F, corners[0]);
        if (std::abs(prev) < 1e-300) return std::nullopt;
        for (int e = 0; e < 4; ++e) {
            for (int k = 1; k <= per_edge; ++k) {
                const Complex w = corners[e] + (corners[e + 1] - corners[e]) * (static_cast<double>(k) / per_edge);
                const Complex cur = eval(F, w);
                if (std::abs(cur) < 1e-300) return std::nullopt;
                total += std::arg(cur / prev);
                prev = cur;
            }
        }
    } catch (const EvalError&) {
        return std::nullopt;
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

struct GridCell {
    int i = 0, j = 0;  ///< lower-left node index
    Rect cell;
    std::optional<int> winding;  ///< nullopt: zero on the cell boundary
};

struct ValidationReport {
    double min_abs_F = 0.0;
    Complex argmin_F{};
    std::vector<GridCell> singular_cells;  ///< cells containing a zero of F
    bool data2_exact = true;               ///< (F, -iF) satisfies phi1^2 + phi2^2 = 0 identically
    std::vector<Complex> evaluation_failures;
    std::vector<Complex> cut_crossings;    ///< grid-edge midpoints where a log/pow argument crosses its cut
};

namespace detail {

inline void collect_branch_args(const Expr& e, std::vector<Expr>& out) {
    using K = Expr::Kind;
    switch (e.kind()) {
    case K::literal:
    case K::variable: return;
    case K::negate: collect_branch_args(e.lhs(), out); return;
    case K::call:
        if (e.func() == Func::log) out.push_back(e.lhs());
        collect_branch_args(e.lhs(), out);
        return;
    case K::pow:
        if (!(e.rhs().is_literal() && detail::as_integer(e.rhs().value()))) out.push_back(e.lhs());
        collect_branch_args(e.lhs(), out);
        collect_branch_args(e.rhs(), out);
        return;
    default:
        collect_branch_args(e.lhs(), out);
        collect_branch_args(e.rhs(), out);
    }
}

/// True when the straight edge a -> b carries the branch argument across the
/// negative real axis (linear interpolation of the argument between samples).
inline bool crosses_cut(const Expr& arg, Complex a, Complex b, int samples = 4) {
    Complex prev = eval(arg, a);
    for (int k = 1; k <= samples; ++k) {
        const Complex cur = eval(arg, a + (b - a) * (static_cast<double>(k) / samples));
        if ((prev.imag() > 0.0) != (cur.imag() > 0.0) || prev.imag() == 0.0 || cur.imag() == 0.0) {
            const double di = cur.imag() - prev.imag();
            const double t = di == 0.0 ? 0.0 : -prev.imag() / di;
            const double re = prev.real() + t * (cur.real() - prev.real());
            if (re < 0.0) return true;
        }
        prev = cur;
    }
    return false;
}

} // namespace detail

/// Scans the grid for zeros of F (singular cells), evaluation failures, and
/// branch-cut crossings of F and G.
inline ValidationReport validate_data(const WeierstrassData& data, const GridSpec& grid, double tol = 1e-12) {
    if (!grid.valid()) throw std::invalid_argument("validate_data: grid must be at least 2x2");
    ValidationReport r;
    r.min_abs_F = std::numeric_limits<double>::infinity();
    const Rect& d = data.domain;
    for (int j = 0; j < grid.nv; ++j) {
        for (int i = 0; i < grid.nu; ++i) {
            auto [u, v] = grid_node(d, grid, i, j);
            const Complex w(u, v);
            try {
                const double a = std::abs(eval(data.F, w));
                eval(data.G, w);
                if (a < r.min_abs_F) {
                    r.min_abs_F = a;
                    r.argmin_F = w;
                }
            } catch (const EvalError&) {
                r.evaluation_failures.push_back(w);
            }
        }
    }
    for (int j = 0; j + 1 < grid.nv; ++j) {
        for (int i = 0; i + 1 < grid.nu; ++i) {
            auto [ua, va] = grid_node(d, grid, i, j);
            auto [ub, vb] = grid_node(d, grid, i + 1, j + 1);
            GridCell c{i, j, Rect{ua, ub, va, vb}, std::nullopt};
            c.winding = cell_winding_number(data.F, c.cell);
            bool hit = c.winding.has_value() && *c.winding != 0;
            bool evaluable = true;
            for (Complex w : {Complex(ua, va), Complex(ub, va), Complex(ua, vb), Complex(ub, vb)}) {
                try {
                    hit = hit || std::abs(eval(data.F, w)) <= tol;
                } catch (const EvalError&) {
                    evaluable = false;
                }
            }
            // No winding number and evaluable corners: the contour runs through a zero.
            if (!c.winding && evaluable) hit = true;
            if (hit) r.singular_cells.push_back(c);
        }
    }
    std::vector<Expr> args;
    detail::collect_branch_args(data.F, args);
    detail::collect_branch_args(data.G, args);
    if (!args.empty()) {
        auto check_edge = [&](Complex a, Complex b) {
            for (const Expr& arg : args) {
                try {
                    if (detail::crosses_cut(arg, a, b)) {
                        r.cut_crossings.push_back(0.5 * (a + b));
                        return;
                    }
                } catch (const EvalError&) {
                }
            }
        };
        for (int j = 0; j < grid.nv; ++j) {
            for (int i = 0; i < grid.nu; ++i) {
                auto [u, v] = grid_node(d, grid, i, j);
                if (i + 1 < grid.nu) {
                    auto [u2, v2] = grid_node(d, grid, i + 1, j);
                    check_edge({u, v}, {u2, v2});
                }
                if (j + 1 < grid.nv) {
                    auto [u2, v2] = grid_node(d, grid, i, j + 1);
                    check_edge({u, v}, {u2, v2});
                }
            }
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Closed-form metric and second fundamental form from the data

/// Induced metric factor |F(w)|^2 (g11 = g22, g12 = 0).
inline double metric_at(const WeierstrassData& data, Complex w) { return std::norm(eval(data.F, w)); }

namespace detail {

struct DataDerivatives {
    Complex F, dF, G, dG;
};

inline DataDerivatives data_derivatives(const WeierstrassData& data, Complex w, double tol) {
    DataDerivatives d{eval(data.F, w), eval(differentiate(data.F), w), eval(data.G, w), eval(differentiate(data.G), w)};
    if (std::abs(d.F) <= tol)
        throw NearZeroError("|F| = " + std::to_string(std::abs(d.F)) + " too small at " + std::to_string(w.real()) +
                            "+" + std::to_string(w.imag()) + "i");
    return d;
}

} // namespace detail

/// g = |F|^2 (du^2 + dv^2) and
/// h = {(Re G)_u - (|F|_u/|F|) Re G - (|F|_v/|F|) Im G} (du^2 - dv^2)
///   + {(Re G)_v - (|F|_v/|F|) Re G + (|F|_u/|F|) Im G} (2 du dv),
/// with (Re G)_u = Re G', (Re G)_v = -Im G', |F|_u = Re(F' conj F)/|F|,
/// |F|_v = -Im(F' conj F)/|F|.
inline FundamentalForms second_form_from_data(const WeierstrassData& data, Complex w, double tol = 1e-12) {
    const auto d = detail::data_derivatives(data, w, tol);
    const double n2 = std::norm(d.F);
    const Complex prod = d.dF * std::conj(d.F);
    const double p = prod.real() / n2;   // |F|_u / |F|
    const double q = -prod.imag() / n2;  // |F|_v / |F|
    const double A = d.G.real(), B = d.G.imag();
    const double Au = d.dG.real(), Av = -d.dG.imag();
    FundamentalForms m;
    m.g11 = m.g22 = n2;
    m.g12 = 0.0;
    m.h11 = Au - p * A - q * B;
    m.h22 = -m.h11;
    m.h12 = Av - q * A + p * B;
    return m;
}

/// det h = -((|G|_u)^2 + (|G|_v)^2) - |G/F|^2 ((|F|_u)^2 + (|F|_v)^2)
///         + 2 |G/F| (|F|_u |G|_u + |F|_v |G|_v).
/// At a zero of G the first term takes its limit |G'|^2 and the last vanishes.
inline double det_h_from_data(const WeierstrassData& data, Complex w, double tol = 1e-12) {
    const auto d = detail::data_derivatives(data, w, tol);
    const double absF = std::abs(d.F), absG = std::abs(d.G);
    const Complex pf = d.dF * std::conj(d.F);
    const double Fu = pf.real() / absF, Fv = -pf.imag() / absF;
    const double ratio = absG / absF;
    if (absG == 0.0) return -std::norm(d.dG) - 0.0;
    const Complex pg = d.dG * std::conj(d.G);
    const double Gu = pg.real() / absG, Gv = -pg.imag() / absG;
    return -(Gu * Gu + Gv * Gv) - ratio * ratio * (Fu * Fu + Fv * Fv) + 2.0 * ratio * (Fu * Gu + Fv * Gv);
}

} // namespace dmin
