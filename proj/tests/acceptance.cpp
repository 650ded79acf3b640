// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dmin/dmin.hpp"

#include "gen.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>

using namespace dmin;

namespace {

const double pi = std::numbers::pi;
const Rect unit{-1, 1, -1, 1};

struct Outcome {
    bool pass = true;
    std::string detail;
};

/// Accumulates a worst-case value against a bound.
struct Bound {
    std::string name;
    double limit;
    double worst = 0.0;
    void see(double x) { worst = std::max(worst, x); }
    bool ok() const { return worst < limit; }
    std::string str() const {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s %.3g (< %.0e)", name.c_str(), worst, limit);
        return buf;
    }
};

Outcome from(std::initializer_list<const Bound*> bs, std::string extra = "") {
    Outcome o;
    for (const Bound* b : bs) {
        o.pass = o.pass && b->ok();
        o.detail += (o.detail.empty() ? "" : "; ") + b->str();
    }
    if (!extra.empty()) o.detail += "; " + extra;
    return o;
}

WeierstrassData wdata(const std::string& F, const std::string& G, Vec021 origin = {}) {
    return {parse_expr(F), parse_expr(G), 0.0, unit, origin};
}

/// The data the generation criteria run over: the worked examples plus a few
/// with non-constant G.
std::vector<WeierstrassData> generated() {
    return {wdata("z", "1"),          wdata("exp(z)", "1"),        wdata("1", "z"),
            wdata("z^2 + 1", "sin(z)"), wdata("exp(z)", "z^3"), wdata("cosh(z) + 2", "exp(-z)")};
}

std::vector<Complex> samples(int n, double r, std::uint64_t seed) {
    testgen::Rng rng(seed);
    std::vector<Complex> w(n);
    for (auto& x : w) x = rng.complex_in(r);
    return w;
}

// ---------------------------------------------------------------------------

Outcome closed_forms() {
    using Closed = std::function<Vec021(double, double)>;
    struct Case {
        std::string label;
        std::string F, G;
        double theta;
        Closed exact;
        bool swap = false;  // compare f(u, v) with exact(v, u)
    };
    const std::vector<Case> cases{
        {"(z,1) t=0", "z", "1", 0, [](double u, double v) { return Vec021{0.5 * (u * u - v * v), u * v, u}; }},
        {"(z,1) t=pi/2", "z", "1", pi / 2, [](double u, double v) { return Vec021{u * v, -0.5 * (u * u - v * v), v}; }},
        {"(e^z,1) t=0", "exp(z)", "1", 0,
         [](double u, double v) { return Vec021{std::exp(u) * std::cos(v), std::exp(u) * std::sin(v), u}; }},
        {"(e^z,1) t=pi/2", "exp(z)", "1", pi / 2,
         [](double u, double v) { return Vec021{std::exp(u) * std::sin(v), -std::exp(u) * std::cos(v), v}; }},
        {"(1,z) t=0", "1", "z", 0, [](double u, double v) { return Vec021{u, v, 0.5 * (u * u - v * v)}; }},
        // the quarter turn of (1, z) is (v, -u, uv); the closed form (u, -v, uv)
        // is the same surface with the parameters exchanged
        {"(1,z) t=pi/2", "1", "z", pi / 2, [](double u, double v) { return Vec021{u, -v, u * v}; }, true},
    };
    Bound err{"sup error", 1e-8}, time{"max seconds", 2.0};
    const GridSpec g{64, 64};
    for (const auto& c : cases) {
        // closed forms fix the integration constant: origin = exact value at the base point
        const Vec021 origin = c.exact(0, 0);
        const auto s = weierstrass_surface(wdata(c.F, c.G, origin), FamilyAngle(c.theta));
        const auto t0 = std::chrono::steady_clock::now();
        const auto pts = s->sample_grid(g);
        time.see(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        for (int j = 0; j < g.nv; ++j)
            for (int i = 0; i < g.nu; ++i) {
                auto [u, v] = grid_node(unit, g, i, j);
                const Vec021 e = c.swap ? c.exact(v, u) : c.exact(u, v);
                err.see(sup_norm(pts[static_cast<std::size_t>(j) * g.nu + i] - e));
            }
    }
    return from({&err, &time}, "6 surfaces on 64x64");
}

Outcome metric_law() {
    Bound err{"max |g - |F|^2|", 1e-6};
    int n = 0;
    for (const auto& d : generated()) {
        const auto s = surface_from_data(d, FamilyAngle(0.7));
        for (Complex w : samples(200, 0.9, 0xA11 + n)) {
            const auto [fu, fv] = first_partials<Vec021>(s, w.real(), w.imag(), 1e-4);
            const double lam = metric_at(d, w);
            err.see(std::abs(deg_inner(fu, fu) - lam));
            err.see(std::abs(deg_inner(fv, fv) - lam));
            err.see(std::abs(deg_inner(fu, fv)));
        }
        ++n;
    }
    return from({&err}, std::to_string(n) + " surfaces x 200 samples");
}

Outcome harmonic_isothermal() {
    Bound lap{"max |Laplacian|", 1e-5}, iso{"max |g11-g22|,|g12|", 1e-6};
    int n = 0;
    for (const auto& d : generated()) {
        for (double theta : {0.0, pi / 2, 2.0}) {
            const auto s = surface_from_data(d, FamilyAngle(theta));
            for (Complex w : samples(50, 0.9, 0xB22 + n)) {
                const auto p = partials<Vec021>(s, w.real(), w.imag(), 1e-3);
                lap.see(sup_norm(p.fuu + p.fvv));
                const auto [fu, fv] = first_partials<Vec021>(s, w.real(), w.imag(), 1e-4);
                iso.see(std::abs(deg_inner(fu, fu) - deg_inner(fv, fv)));
                iso.see(std::abs(deg_inner(fu, fv)));
            }
            ++n;
        }
    }
    return from({&lap, &iso}, std::to_string(n) + " surfaces x 50 samples");
}

Outcome associated_family() {
    Bound metric{"metric spread over 6 angles", 1e-8}, conj{"conjugate identity", 1e-8};
    const GridSpec g{12, 12};
    const Rect inner = unit.inset(0.05);
    for (const auto& d : generated()) {
        std::vector<std::vector<double>> grids;
        for (int k = 0; k < 6; ++k) {
            const auto s = surface_from_data(d, FamilyAngle(k * pi / 3 + 0.1));
            std::vector<double> m;
            for (int j = 0; j < g.nv; ++j)
                for (int i = 0; i < g.nu; ++i) {
                    auto [u, v] = grid_node(inner, g, i, j);
                    const auto [fu, fv] = first_partials<Vec021>(s, u, v, 1e-4);
                    m.insert(m.end(), {deg_inner(fu, fu), deg_inner(fu, fv), deg_inner(fv, fv)});
                }
            grids.push_back(std::move(m));
        }
        for (std::size_t k = 1; k < grids.size(); ++k)
            for (std::size_t q = 0; q < grids[0].size(); ++q) metric.see(std::abs(grids[k][q] - grids[0][q]));

        // Re \int (-iF, -F, -iG) against Im \int (F, -iF, G), integrated independently
        const auto c = surface_from_data(conjugate(d));
        const Expr mF = build::mul(Expr::literal(Complex(0, -1)), d.F);
        for (Complex w : samples(40, 0.9, 0xC33)) {
            const Vec021 a = c(w.real(), w.imag());
            const Vec021 b{integrate_holomorphic(d.F, 0.0, w).imag(), integrate_holomorphic(mF, 0.0, w).imag(),
                           integrate_holomorphic(d.G, 0.0, w).imag()};
            conj.see(sup_norm(a - b));
        }
    }
    return from({&metric, &conj});
}

Outcome second_form() {
    Bound h{"max |h_formula - h_numeric|", 1e-5}, det{"max |det h formula - h11 h22 - h12^2|", 1e-6};
    for (const auto& d : {wdata("1", "z"), wdata("exp(z)", "1"), wdata("z", "1")}) {
        const auto s = surface_from_data(d);
        for (Complex w : samples(60, 0.9, 0xD44)) {
            if (std::abs(w) < 0.2) continue;  // (z, 1) degenerates at 0
            const auto a = second_form_from_data(d, w);
            const auto b = fundamental_forms(s, w.real(), w.imag());
            h.see(std::max({std::abs(a.h11 - b.h11), std::abs(a.h12 - b.h12), std::abs(a.h22 - b.h22)}));
            det.see(std::abs(det_h_from_data(d, w) - a.det_h()));
            det.see(std::abs(det_h_from_data(d, w) - b.det_h()));
        }
    }
    return from({&h, &det});
}

Outcome curvature_signs() {
    Bound par{"paraboloid |K - 4|", 1e-6}, hel{"helicoid2 |K + 1/v^4|", 1e-5}, dmin{"d-minimal max(K, 0)", 1e-8};
    bool classes = true;
    AnalysisOptions o;
    o.grid = {10, 10};
    for (const auto& s : analyze_grid(catalog::get("paraboloid").patch, o)) {
        par.see(std::abs(s.K - 4.0));
        classes = classes && s.cls == PointClass::elliptic;
    }
    for (const auto& s : analyze_grid(catalog::get("helicoid2").patch, o)) {
        hel.see(std::abs(s.K + 1.0 / std::pow(s.v, 4)));
        classes = classes && s.cls == PointClass::hyperbolic;
    }
    for (const auto& n : catalog::names()) {
        const auto e = catalog::get(n);
        if (!e.expected.is_d_minimal) continue;
        for (const auto& s : analyze_grid(e.patch, o)) dmin.see(std::max(s.K, 0.0));
    }
    Outcome r = from({&par, &hel, &dmin}, classes ? "classes elliptic/hyperbolic" : "WRONG point classes");
    r.pass = r.pass && classes;
    return r;
}

Outcome singular_suite() {
    struct Fig {
        const char *F, *G;
        int mult, rank;
    };
    const Fig figs[] = {{"z", "1", 1, 1},   {"z^2", "1", 2, 1}, {"z^3", "1", 3, 1},
                        {"z^4", "1", 4, 1}, {"z", "z^2", 1, 0}, {"z^2", "z", 2, 0}};
    int figs_ok = 0;
    for (const auto& f : figs) {
        const auto r = singular_report(wdata(f.F, f.G), unit);
        if (r.size() == 1 && std::abs(r[0].w) < 1e-3 && r[0].multiplicity == f.mult && r[0].rank == f.rank) ++figs_ok;
    }

    testgen::Rng rng(0x5100);
    int planted_ok = 0;
    for (int n = 0; n < 50; ++n) {
        std::vector<Complex> roots;
        const int degree = rng.int_in(1, 5);
        while (static_cast<int>(roots.size()) < degree) {
            const Complex r = rng.complex_in(0.8);
            bool far = true;
            for (Complex q : roots) far = far && std::abs(q - r) >= 0.2;
            if (far) roots.push_back(r);
        }
        std::string text;
        for (Complex r : roots) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%s(z - (%.17g) - (%.17g)*i)", text.empty() ? "" : " * ", r.real(), r.imag());
            text += buf;
        }
        const auto z = find_zeros(parse_expr(text), unit);
        bool ok = z.size() == roots.size();
        for (Complex r : roots) {
            double best = 1e300;
            for (const auto& c : z) best = std::min(best, std::abs(c.w - r));
            ok = ok && best < 1e-8;
        }
        planted_ok += ok;
    }
    Outcome o;
    o.pass = figs_ok == 6 && planted_ok == 50;
    o.detail = "figure data " + std::to_string(figs_ok) + "/6; planted roots " + std::to_string(planted_ok) + "/50";
    return o;
}

Outcome reconstruction() {
    Bound err{"max form error", 1e-5};
    testgen::Rng rng(0x4E55);
    int compatible = 0;
    for (int n = 0; n < 20; ++n) {
        // random quartic height; its Hessian is a compatible triple
        double c[5][5] = {};
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b) c[a][b] = rng.uniform(-2, 2);
        std::string t[3] = {"0", "0", "0"};
        auto add = [](std::string& s, double k, int a, int b) {
            char buf[80];
            std::snprintf(buf, sizeof buf, " + (%.17g)*u^%d*v^%d", k, a, b);
            s += buf;
        };
        for (int a = 0; a <= 4; ++a)
            for (int b = 0; a + b <= 4; ++b) {
                if (a >= 2) add(t[0], c[a][b] * a * (a - 1), a - 2, b);
                if (a >= 1 && b >= 1) add(t[1], c[a][b] * a * b, a - 1, b - 1);
                if (b >= 2) add(t[2], c[a][b] * b * (b - 1), a, b - 2);
            }
        const auto p = PrescribedForms::parse(t[0], t[1], t[2], unit);
        if (!codazzi_check(p).pass) continue;
        ++compatible;
        const auto s = surface_from_forms(p);
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                auto [u, v] = grid_node(unit.inset(0.01), {8, 8}, i, j);
                const auto m = fundamental_forms(s, u, v);
                const auto h = p(u, v);
                err.see(std::max({std::abs(m.h11 - h[0]), std::abs(m.h12 - h[1]), std::abs(m.h22 - h[2])}));
            }
    }
    bool rejected = false;
    try {
        surface_from_forms(PrescribedForms::parse("v", "0", "0", unit));
    } catch (const CodazziError&) {
        rejected = true;
    }
    Outcome o = from({&err}, std::to_string(compatible) + "/20 compatible; (v,0,0) " +
                                 (rejected ? "rejected" : "NOT rejected"));
    o.pass = o.pass && rejected && compatible == 20;
    return o;
}

Outcome minkowski() {
    std::string failed;
    int minimal = 0;
    for (const auto& n : catalog::names()) {
        const auto e = catalog::get(n);
        if (!e.expected.is_d_minimal) continue;
        ++minimal;
        if (!verify_flat_zmc(embed(e.patch), {{16, 16}, 1e-5}).pass) failed += " " + n;
    }
    const auto cubic = catalog::get("cubic_harmonic").patch;
    const auto cubic_rep = verify_flat_zmc(embed(cubic), {{16, 16}, 1e-5});
    const auto locus = vanishing_h_locus(cubic);
    const bool origin_only = locus.clusters.size() == 1 && std::abs(locus.clusters[0].u) < 1e-9 &&
                             std::abs(locus.clusters[0].v) < 1e-9 && locus.clusters[0].isolated;
    const auto par = verify_flat_zmc(embed(catalog::get("paraboloid").patch), {{16, 16}, 1e-5});
    const bool par_fails = !par.pass && par.max_H > 1e-5;
    Outcome o;
    o.pass = failed.empty() && cubic_rep.pass && origin_only && par_fails;
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d d-minimal entries%s; cubic E-locus %s; paraboloid max|H| %.3g (%s)", minimal,
                  failed.empty() ? " pass" : (" FAIL:" + failed).c_str(), origin_only ? "{(0,0)}" : "WRONG",
                  par.max_H, par_fails ? "fails" : "PASSES");
    o.detail = buf;
    return o;
}

Outcome dlambda() {
    Bound h{"max |h^lambda|", 1e-6};
    double plain = 0.0;
    for (double lambda : {0.5, 1.0, 2.0}) {
        const auto e = catalog::get("dlambda_geodesic", lambda);
        const double step = default_step(e.patch.domain());
        const Rect inner = e.patch.domain().inset(4 * step);
        for (int j = 0; j < 20; ++j)
            for (int i = 0; i < 20; ++i) {
                auto [u, v] = grid_node(inner, {20, 20}, i, j);
                h.see(h_lambda(e.patch, lambda, u, v, step).h_sup());
                plain = std::max(plain, fundamental_forms(e.patch, u, v, step).h_sup());
            }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "plain max |h| %.3g", plain);
    Outcome o = from({&h}, buf);
    o.pass = o.pass && plain > 1e-3;
    return o;
}

Outcome rotational_ode() {
    Bound dev{"max deviation", 1e-7};
    for (auto [C1, C2] : {std::pair{1.0, 0.0}, std::pair{-2.0, 3.0}, std::pair{0.5, -1.0}})
        dev.see(rotational_profile_check(C1, C2, 1.0, std::numbers::e, 1000));
    return from({&dev}, "3 constant pairs on [1, e]");
}

Outcome global_properties() {
    Bound K{"max intrinsic |K|", 1e-5};
    std::string not_isolated;
    for (const auto& n : catalog::names()) {
        const auto e = catalog::get(n);
        const double step = default_step(e.patch.domain());
        const Rect inner = e.patch.domain().inset(110 * step);
        for (int j = 0; j < 6; ++j)
            for (int i = 0; i < 6; ++i) {
                auto [u, v] = grid_node(inner, {6, 6}, i, j);
                K.see(std::abs(intrinsic_curvature(e.patch, u, v, step)));
            }
        // the plane is totally geodesic; every other entry must have a discrete E-locus
        if (n != "plane" && !vanishing_h_locus(e.patch).all_isolated()) not_isolated += " " + n;
    }
    for (const auto& d : generated()) {
        const auto s = surface_from_data(d, FamilyAngle(1.1));
        for (Complex w : samples(8, 0.8, 0xE55)) {
            if (std::abs(d.F.kind() == Expr::Kind::variable ? w : Complex(1)) < 0.2) continue;  // F = z vanishes at 0
            K.see(std::abs(intrinsic_curvature(s, w.real(), w.imag(), 1e-4)));
        }
    }
    Outcome o = from({&K}, not_isolated.empty() ? "E-loci discrete" : "non-isolated E-locus:" + not_isolated);
    o.pass = o.pass && not_isolated.empty();
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
        {"closed-form reproduction", closed_forms},
        {"metric law", metric_law},
        {"harmonic and isothermal", harmonic_isothermal},
        {"associated family", associated_family},
        {"second-form formula", second_form},
        {"curvature signs", curvature_signs},
        {"singularity suite", singular_suite},
        {"reconstruction roundtrip", reconstruction},
        {"Minkowski correspondence", minkowski},
        {"d^lambda example", dlambda},
        {"rotational ODE", rotational_ode},
        {"global properties", global_properties},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("criterion %2zu %s  %s: %s\n", k + 1, o.pass ? "PASS" : "FAIL", criteria[k].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
