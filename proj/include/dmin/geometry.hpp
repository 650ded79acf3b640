#pragma once

// Surface geometry in R^{0,2,1}: R^3 with the degenerate metric dx^2 + dy^2.
// The z-direction is metrically invisible and spans every normal space.

#include "dmin/error.hpp"
#include "dmin/numeric.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dmin {

struct Vec021 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec021 operator+(const Vec021& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec021 operator-(const Vec021& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec021 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec021 operator-() const { return {-x, -y, -z}; }
    bool operator==(const Vec021&) const = default;
};

/// The constant transversal field spanning each normal space.
inline constexpr Vec021 xi{0.0, 0.0, 1.0};

/// Degenerate inner product: ignores z.
inline double deg_inner(const Vec021& a, const Vec021& b) { return a.x * b.x + a.y * b.y; }

/// Degenerate norm sqrt(x^2 + y^2).
inline double deg_norm(const Vec021& a) { return std::hypot(a.x, a.y); }

/// Sup-norm over all three components (used when comparing surfaces as maps).
inline double sup_norm(const Vec021& a) { return std::max({std::abs(a.x), std::abs(a.y), std::abs(a.z)}); }

enum class PatchKind { closed_form, weierstrass, graph };

inline std::string_view to_string(PatchKind k) {
    switch (k) {
    case PatchKind::closed_form: return "closed_form";
    case PatchKind::weierstrass: return "weierstrass";
    case PatchKind::graph: return "graph";
    }
    return "?";
}

/// A parametrized map (u, v) -> R^{0,2,1} over a rectangle. Immutable; safe
/// to evaluate concurrently.
class SurfacePatch {
public:
    using Evaluator = std::function<Vec021(double, double)>;

    SurfacePatch(Evaluator f, Rect domain, PatchKind kind, std::vector<Complex> singular_points = {})
        : f_(std::move(f)), domain_(domain), kind_(kind), singular_(std::move(singular_points)) {
        if (!domain_.valid()) throw std::invalid_argument("SurfacePatch: empty domain");
    }

    Vec021 operator()(double u, double v) const { return f_(u, v); }
    const Rect& domain() const noexcept { return domain_; }
    PatchKind kind() const noexcept { return kind_; }
    /// Parameter points declared singular (exempt from non-degeneracy).
    const std::vector<Complex>& singular_points() const noexcept { return singular_; }
    const Evaluator& evaluator() const noexcept { return f_; }

private:
    Evaluator f_;
    Rect domain_;
    PatchKind kind_;
    std::vector<Complex> singular_;
};

/// Graph surface (u, v, height(u, v)).
inline SurfacePatch graph_patch(std::function<double(double, double)> height, Rect domain) {
    return SurfacePatch([h = std::move(height)](double u, double v) { return Vec021{u, v, h(u, v)}; }, domain,
                        PatchKind::graph);
}

/// Coefficients of the induced metric g and second fundamental form h.
struct FundamentalForms {
    double g11 = 0.0, g12 = 0.0, g22 = 0.0;
    double h11 = 0.0, h12 = 0.0, h22 = 0.0;

    double det_g() const noexcept { return g11 * g22 - g12 * g12; }
    double det_h() const noexcept { return h11 * h22 - h12 * h12; }
    double h_sup() const noexcept { return std::max({std::abs(h11), std::abs(h12), std::abs(h22)}); }
};

inline constexpr double default_det_tol = 1e-10;

namespace detail {

inline void require_interior(const Rect& r, double u, double v, double margin, const char* who) {
    if (!r.inset(margin).contains(u, v))
        throw std::invalid_argument(std::string(who) + ": point (" + std::to_string(u) + ", " +
                                    std::to_string(v) + ") is not interior with margin " +
                                    std::to_string(margin));
}

/// Splits f_ij = a f_u + b f_v + h xi by solving the 2x2 system in the xy-plane.
inline FundamentalForms forms_from_partials(const Partials<Vec021>& p, double det_tol) {
    FundamentalForms out;
    out.g11 = deg_inner(p.fu, p.fu);
    out.g12 = deg_inner(p.fu, p.fv);
    out.g22 = deg_inner(p.fv, p.fv);
    const double jac = p.fu.x * p.fv.y - p.fv.x * p.fu.y;  // det of [f_u.xy f_v.xy]
    if (out.det_g() <= det_tol || jac == 0.0)
        throw DegenerateMetricError(out.det_g(), "degenerate metric: det g = " + std::to_string(out.det_g()));
    auto normal_part = [&](const Vec021& w) {
        const double a = (w.x * p.fv.y - p.fv.x * w.y) / jac;
        const double b = (p.fu.x * w.y - w.x * p.fu.y) / jac;
        return w.z - a * p.fu.z - b * p.fv.z;
    };
    out.h11 = normal_part(p.fuu);
    out.h12 = normal_part(p.fuv);
    out.h22 = normal_part(p.fvv);
    return out;
}

inline Partials<Vec021> patch_partials(const SurfacePatch& s, double u, double v, double step, const char* who) {
    require_interior(s.domain(), u, v, 2.0 * step, who);
    return partials<Vec021>(s.evaluator(), u, v, step);
}

} // namespace detail

/// First and second fundamental forms at (u, v) by finite differences.
/// Throws DegenerateMetricError when det g <= det_tol (a singular point).
inline FundamentalForms fundamental_forms(const SurfacePatch& s, double u, double v, double step,
                                          double det_tol = default_det_tol) {
    return detail::forms_from_partials(detail::patch_partials(s, u, v, step, "fundamental_forms"), det_tol);
}

inline FundamentalForms fundamental_forms(const SurfacePatch& s, double u, double v) {
    return fundamental_forms(s, u, v, default_step(s.domain()));
}

/// Mean curvature (1/2) tr_g h.
inline double mean_curvature(const FundamentalForms& m) {
    const double d = m.det_g();
    if (!(d > 0.0)) throw DegenerateMetricError(d, "mean_curvature: degenerate metric");
    return 0.5 * (m.g22 * m.h11 - 2.0 * m.g12 * m.h12 + m.g11 * m.h22) / d;
}

/// Relative Gaussian curvature det h / det g.
inline double relative_gauss_curvature(const FundamentalForms& m) {
    const double d = m.det_g();
    if (!(d > 0.0)) throw DegenerateMetricError(d, "relative_gauss_curvature: degenerate metric");
    return m.det_h() / d;
}

enum class PointClass { elliptic, hyperbolic, parabolic };

inline std::string_view to_string(PointClass c) {
    switch (c) {
    case PointClass::elliptic: return "elliptic";
    case PointClass::hyperbolic: return "hyperbolic";
    case PointClass::parabolic: return "parabolic";
    }
    return "?";
}

inline PointClass classify_point(double K, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("classify_point: tol must be positive");
    if (K > tol) return PointClass::elliptic;
    if (K < -tol) return PointClass::hyperbolic;
    return PointClass::parabolic;
}

// ---------------------------------------------------------------------------
// Codazzi equations in flat coordinates

/// max(|(h11)_v - (h12)_u|, |(h22)_u - (h12)_v|) for a field of second forms,
/// by central differences with the given step.
template <class HField>
double codazzi_residual_of(HField&& h, double u, double v, double step) {
    auto du = [&](double a, double b) { return h(a, b); };
    const FundamentalForms pu = du(u + step, v), mu = du(u - step, v);
    const FundamentalForms pv = du(u, v + step), mv = du(u, v - step);
    const FundamentalForms pu2 = du(u + 0.5 * step, v), mu2 = du(u - 0.5 * step, v);
    const FundamentalForms pv2 = du(u, v + 0.5 * step), mv2 = du(u, v - 0.5 * step);
    auto rich = [](double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; };
    auto d = [&](double p, double m, double h_) { return (p - m) / (2.0 * h_); };
    const double h11_v = rich(d(pv.h11, mv.h11, step), d(pv2.h11, mv2.h11, 0.5 * step));
    const double h12_u = rich(d(pu.h12, mu.h12, step), d(pu2.h12, mu2.h12, 0.5 * step));
    const double h22_u = rich(d(pu.h22, mu.h22, step), d(pu2.h22, mu2.h22, 0.5 * step));
    const double h12_v = rich(d(pv.h12, mv.h12, step), d(pv2.h12, mv2.h12, 0.5 * step));
    return std::max(std::abs(h11_v - h12_u), std::abs(h22_u - h12_v));
}

/// Codazzi residual of a patch whose coordinates are flat (g = du^2 + dv^2),
/// e.g. a graph. `step` is the inner differencing step; h is differenced with 5*step.
inline double codazzi_residual(const SurfacePatch& s, double u, double v, double step) {
    const double outer = 5.0 * step;
    detail::require_interior(s.domain(), u, v, outer + 2.0 * step, "codazzi_residual");
    const FundamentalForms at = fundamental_forms(s, u, v, step);
    if (std::abs(at.g11 - 1.0) > 1e-6 || std::abs(at.g12) > 1e-6 || std::abs(at.g22 - 1.0) > 1e-6)
        throw std::invalid_argument("codazzi_residual: coordinates are not flat (g != identity)");
    return codazzi_residual_of([&](double a, double b) { return fundamental_forms(s, a, b, step); }, u, v, outer);
}

// ---------------------------------------------------------------------------
// Affine isometries (x, y, z) -> (T(x, y), a x + b y + c z) + translation

struct AffineIsometry {
    std::array<double, 4> T{1.0, 0.0, 0.0, 1.0};  // row-major 2x2, orthogonal
    double a = 0.0, b = 0.0, c = 1.0;              // c != 0
    Vec021 translation{};

    void validate() const {
        const double e00 = T[0] * T[0] + T[2] * T[2] - 1.0;
        const double e11 = T[1] * T[1] + T[3] * T[3] - 1.0;
        const double e01 = T[0] * T[1] + T[2] * T[3];
        if (std::max({std::abs(e00), std::abs(e11), std::abs(e01)}) > 1e-12)
            throw InvalidIsometryError("affine isometry: T is not orthogonal");
        if (c == 0.0) throw InvalidIsometryError("affine isometry: c must be non-zero");
    }

    Vec021 linear(const Vec021& p) const {
        return {T[0] * p.x + T[1] * p.y, T[2] * p.x + T[3] * p.y, a * p.x + b * p.y + c * p.z};
    }
    Vec021 operator()(const Vec021& p) const { return linear(p) + translation; }

    /// Rotation by `angle` in the xy-plane.
    static AffineIsometry rotation(double angle) {
        AffineIsometry A;
        A.T = {std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle)};
        return A;
    }
};

inline SurfacePatch apply_isometry(const AffineIsometry& A, const SurfacePatch& s) {
    A.validate();
    return SurfacePatch([A, s](double u, double v) { return A(s(u, v)); }, s.domain(), s.kind(),
                        s.singular_points());
}

// ---------------------------------------------------------------------------
// Curves

struct Curve {
    std::function<Vec021(double)> f;
    double t0 = 0.0, t1 = 1.0;

    Vec021 operator()(double t) const { return f(t); }
};

/// `n` sample parameters at cell centres of [t0, t1]; odd n includes the midpoint.
inline std::vector<double> curve_samples(const Curve& c, int n) {
    std::vector<double> t(n);
    for (int k = 0; k < n; ++k) t[k] = c.t0 + (c.t1 - c.t0) * (k + 0.5) / n;
    return t;
}

inline Vec021 curve_velocity(const Curve& c, double t, double step) {
    return derivative<Vec021>(c.f, t, step);
}

/// |c'(t)| in the degenerate norm.
inline double curve_speed(const Curve& c, double t, double step) { return deg_norm(curve_velocity(c, t, step)); }

struct NullCurveReport {
    bool is_null = false;
    bool xy_constant = false;       ///< x and y constant across the samples
    bool consistency_alarm = false; ///< null but not a vertical line: numerics disagree with theory
    double max_speed = 0.0;
};

/// A regular curve is null iff it is a line parallel to the z-axis.
inline NullCurveReport is_null_curve(const Curve& c, int samples, double tol = 1e-9, double step = 1e-4) {
    NullCurveReport r;
    const auto ts = curve_samples(c, samples);
    for (double t : ts) r.max_speed = std::max(r.max_speed, curve_speed(c, t, step));
    r.is_null = r.max_speed < tol;
    const Vec021 first = c(ts.front());
    double drift = 0.0;
    for (double t : ts) drift = std::max(drift, deg_norm(c(t) - first));
    r.xy_constant = drift < tol * std::max(1.0, c.t1 - c.t0) * 10.0;
    r.consistency_alarm = r.is_null && !r.xy_constant;
    return r;
}

struct ArcLengthReport {
    bool admissible = true;
    std::optional<double> failure_t;  ///< first sample where |(pi c)'| <= tol

    explicit operator bool() const noexcept { return admissible; }
};

/// An arc-length parameter exists iff the xy-projection is regular.
inline ArcLengthReport arc_length_admissible(const Curve& c, int samples, double tol = 1e-9, double step = 1e-4) {
    ArcLengthReport r;
    for (double t : curve_samples(c, samples)) {
        if (curve_speed(c, t, step) <= tol) {
            r.admissible = false;
            r.failure_t = t;
            return r;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// The deformed connection d^lambda = d + L_lambda xi,
// L_lambda(X, Y) = lambda * (X1 + X2 + X3) * (Y1 + Y2 + Y3).

inline double component_sum(const Vec021& v) { return v.x + v.y + v.z; }

/// Second fundamental form with respect to d^lambda; g is unchanged.
inline FundamentalForms h_lambda(const SurfacePatch& s, double lambda, double u, double v, double step,
                                 double det_tol = default_det_tol) {
    const Partials<Vec021> p = detail::patch_partials(s, u, v, step, "h_lambda");
    FundamentalForms m = detail::forms_from_partials(p, det_tol);
    const double su = component_sum(p.fu), sv = component_sum(p.fv);
    m.h11 += lambda * su * su;
    m.h12 += lambda * su * sv;
    m.h22 += lambda * sv * sv;
    return m;
}

// ---------------------------------------------------------------------------
// Intrinsic curvature of the induced metric

/// Gaussian curvature of the induced metric via Brioschi. The metric is
/// sampled with first differences of size `step` and differenced again with 100*step.
inline double intrinsic_curvature(const SurfacePatch& s, double u, double v, double step) {
    const double outer = 100.0 * step;
    detail::require_interior(s.domain(), u, v, outer + 2.0 * step, "intrinsic_curvature");
    auto metric = [&](double a, double b) {
        const auto [fu, fv] = first_partials<Vec021>(s.evaluator(), a, b, step);
        return Metric2{deg_inner(fu, fu), deg_inner(fu, fv), deg_inner(fv, fv)};
    };
    const Metric2 m = metric(u, v);
    if (m.det() <= default_det_tol) throw DegenerateMetricError(m.det(), "intrinsic_curvature: degenerate metric");
    return brioschi_curvature(metric, u, v, outer);
}

// ---------------------------------------------------------------------------
// Grid analysis

struct FormsSample {
    double u = 0.0, v = 0.0;
    bool singular = false;  ///< det g below tolerance; forms left zero
    FundamentalForms forms;
    double H = 0.0, K = 0.0;
    PointClass cls = PointClass::parabolic;
};

struct AnalysisOptions {
    GridSpec grid{32, 32};
    double step = 0.0;       ///< 0 selects default_step(domain)
    double class_tol = 1e-8; ///< parabolic band for classify_point
};

/// Forms, H, K and point class on an interior grid (inset by 4 steps).
/// Results are in row-major order (v outer, u inner) regardless of threading.
inline std::vector<FormsSample> analyze_grid(const SurfacePatch& s, const AnalysisOptions& opt) {
    if (!opt.grid.valid()) throw std::invalid_argument("analyze_grid: grid must be at least 2x2");
    const double step = opt.step > 0.0 ? opt.step : default_step(s.domain());
    const Rect inner = s.domain().inset(4.0 * step);
    std::vector<FormsSample> out(opt.grid.size());
    parallel_for(out.size(), [&](std::size_t k) {
        const int i = static_cast<int>(k % opt.grid.nu), j = static_cast<int>(k / opt.grid.nu);
        auto [u, v] = grid_node(inner, opt.grid, i, j);
        FormsSample& smp = out[k];
        smp.u = u;
        smp.v = v;
        try {
            smp.forms = fundamental_forms(s, u, v, step);
            smp.H = mean_curvature(smp.forms);
            smp.K = relative_gauss_curvature(smp.forms);
            smp.cls = classify_point(smp.K, opt.class_tol);
        } catch (const DegenerateMetricError&) {
            smp.singular = true;
        }
    });
    return out;
}

} // namespace dmin
