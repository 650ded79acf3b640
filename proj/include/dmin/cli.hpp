#pragma once

// Command-line front end. `run` is the whole program minus main so tests can
// drive it with in-memory streams.

#include "dmin/catalog.hpp"
#include "dmin/error.hpp"
#include "dmin/expr.hpp"
#include "dmin/geometry.hpp"
#include "dmin/minkowski.hpp"
#include "dmin/reconstruct.hpp"
#include "dmin/singular.hpp"
#include "dmin/weierstrass.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dmin::cli {

enum ExitCode : int {
    ok = 0,
    usage = 1,
    parse_error = 2,
    integration_error = 3,
    degenerate = 4,
    codazzi_failure = 5,
};

struct RunConfig {
    std::string F, G, h11, h12, h22, x1, x2, x3, x4;
    std::string catalog, graph, csv_in;
    std::string domain, grid, base, seed;
    double theta = 0.0;
    double lambda = 1.0;
    std::optional<double> tol;
    std::string out, summary, format;
    int max_singular = 0;
};

namespace detail {

inline std::string fmt(double x) {
    if (x == 0.0) x = 0.0;  // drop the sign of negative zero
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

inline std::vector<double> numbers(const std::string& s, std::size_t n, const char* flag) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = std::min(s.find(',', pos), s.size());
        const std::string cell = s.substr(pos, comma - pos);
        double x = 0.0;
        const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), x);
        if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
            throw CLI::ValidationError(flag, "expected " + std::to_string(n) + " comma-separated numbers");
        out.push_back(x);
        pos = comma + 1;
    }
    if (out.size() != n) throw CLI::ValidationError(flag, "expected " + std::to_string(n) + " comma-separated numbers");
    return out;
}

inline Rect domain_of(const RunConfig& c, Rect fallback = {}) {
    if (c.domain.empty()) return fallback;
    const auto d = numbers(c.domain, 4, "--domain");
    const Rect r{d[0], d[1], d[2], d[3]};
    if (!r.valid()) throw CLI::ValidationError("--domain", "domain must satisfy u0 < u1 and v0 < v1");
    return r;
}

inline GridSpec grid_of(const RunConfig& c, GridSpec fallback) {
    if (c.grid.empty()) return fallback;
    const auto g = numbers(c.grid, 2, "--grid");
    const GridSpec out{static_cast<int>(g[0]), static_cast<int>(g[1])};
    if (g[0] != out.nu || g[1] != out.nv || !out.valid())
        throw CLI::ValidationError("--grid", "grid must be two integers >= 2");
    return out;
}

inline double tol_of(const RunConfig& c, double fallback) {
    const double t = c.tol.value_or(fallback);
    if (!(t > 0.0)) throw CLI::ValidationError("--tol", "tolerance must be positive");
    return t;
}

/// Base point: --base if given, else 0 when it lies in the domain, else the centre.
inline Complex base_of(const RunConfig& c, const Rect& d) {
    if (!c.base.empty()) {
        const auto b = numbers(c.base, 2, "--base");
        return {b[0], b[1]};
    }
    if (d.contains(0.0, 0.0)) return {0.0, 0.0};
    return {0.5 * (d.u0 + d.u1), 0.5 * (d.v0 + d.v1)};
}

inline WeierstrassData data_of(const RunConfig& c) {
    if (c.F.empty() || c.G.empty()) throw CLI::ValidationError("--F/--G", "both --F and --G are required");
    WeierstrassData d;
    d.F = parse_expr(c.F);
    d.G = parse_expr(c.G);
    d.domain = domain_of(c);
    d.base = base_of(c, d.domain);
    return d;
}

struct Source {
    SurfacePatch patch;
    std::string label;
};

/// Surface named by --catalog, --graph, or --F/--G (exactly one).
inline Source source_of(const RunConfig& c) {
    const int given = !c.catalog.empty() + !c.graph.empty() + (!c.F.empty() || !c.G.empty());
    if (given != 1) throw CLI::ValidationError("source", "give exactly one of --catalog, --graph, --F/--G");
    if (!c.catalog.empty()) {
        auto e = catalog::get(c.catalog, c.lambda);
        return {e.patch, "catalog:" + e.name};
    }
    if (!c.graph.empty()) {
        const Expr h = parse_real_expr(c.graph);
        return {graph_patch([h](double u, double v) { return eval_real(h, u, v); }, domain_of(c)), "graph:" + c.graph};
    }
    return {surface_from_data(data_of(c), FamilyAngle(c.theta)), "weierstrass"};
}

/// Output stream: the file at `path`, or `fallback` when the path is empty.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            os_ = &fallback;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw CLI::ValidationError("--out", "cannot open " + path);
            os_ = &file_;
        }
    }
    std::ostream& operator*() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

/// Grid mesh: vertices row-major (v outer, u inner); two counter-clockwise
/// triangles per parameter cell.
inline void write_obj(std::ostream& os, const GridSpec& g, const std::vector<Vec021>& pts) {
    for (const auto& p : pts) os << "v " << fmt(p.x) << ' ' << fmt(p.y) << ' ' << fmt(p.z) << '\n';
    for (int j = 0; j + 1 < g.nv; ++j)
        for (int i = 0; i + 1 < g.nu; ++i) {
            const long a = static_cast<long>(j) * g.nu + i + 1, b = a + 1, c = a + g.nu + 1, d = a + g.nu;
            os << "f " << a << ' ' << b << ' ' << c << '\n' << "f " << a << ' ' << c << ' ' << d << '\n';
        }
}

inline void write_points_csv(std::ostream& os, const Rect& r, const GridSpec& g, const std::vector<Vec021>& pts) {
    os << "u,v,x,y,z\n";
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            auto [u, v] = grid_node(r, g, i, j);
            const Vec021& p = pts[static_cast<std::size_t>(j) * g.nu + i];
            os << fmt(u) << ',' << fmt(v) << ',' << fmt(p.x) << ',' << fmt(p.y) << ',' << fmt(p.z) << '\n';
        }
}

inline void write_mesh(const RunConfig& c, std::ostream& out, const Rect& r, const GridSpec& g,
                       const std::vector<Vec021>& pts) {
    const std::string f = c.format.empty() ? "obj" : c.format;
    if (f != "obj" && f != "csv") throw CLI::ValidationError("--format", "mesh output is obj or csv");
    Sink s(c.out, out);
    if (f == "obj")
        write_obj(*s, g, pts);
    else
        write_points_csv(*s, r, g, pts);
}

// ---------------------------------------------------------------------------

inline int cmd_gen(const RunConfig& c, std::ostream& out) {
    const WeierstrassData d = data_of(c);
    const GridSpec g = grid_of(c, {64, 64});
    const auto s = weierstrass_surface(d, FamilyAngle(c.theta));
    const auto pts = s->sample_grid(g);
    write_mesh(c, out, d.domain, g, pts);
    return ok;
}

inline int cmd_analyze(const RunConfig& c, std::ostream& out) {
    const Source src = source_of(c);
    const double tol = tol_of(c, 1e-6);
    AnalysisOptions opt;
    opt.grid = grid_of(c, {32, 32});
    const double step = default_step(src.patch.domain());
    const auto samples = analyze_grid(src.patch, opt);

    int singular = 0;
    double Hmin = 0, Hmax = 0, Kmin = 0, Kmax = 0;
    bool first = true;
    int counts[3] = {0, 0, 0};
    for (const auto& s : samples) {
        if (s.singular) {
            ++singular;
            continue;
        }
        if (first) {
            Hmin = Hmax = s.H;
            Kmin = Kmax = s.K;
            first = false;
        }
        Hmin = std::min(Hmin, s.H);
        Hmax = std::max(Hmax, s.H);
        Kmin = std::min(Kmin, s.K);
        Kmax = std::max(Kmax, s.K);
        ++counts[static_cast<int>(s.cls)];
    }
    if (singular > c.max_singular) {
        throw DegenerateMetricError(0.0, std::to_string(singular) + " degenerate samples exceed the allowed " +
                                             std::to_string(c.max_singular));
    }

    // Codazzi residual is meaningful in flat coordinates, i.e. for graphs.
    nlohmann::json codazzi = nullptr;
    if (src.patch.kind() == PatchKind::graph) {
        const double cstep = 20.0 * step;
        const Rect inner = src.patch.domain().inset(8.0 * cstep);
        std::vector<double> res(samples.size(), 0.0);
        parallel_for(samples.size(), [&](std::size_t k) {
            if (inner.contains(samples[k].u, samples[k].v))
                res[k] = codazzi_residual(src.patch, samples[k].u, samples[k].v, cstep);
        });
        double m = 0.0;
        for (double r : res) m = std::max(m, r);
        codazzi = m;
    }

    if (!c.out.empty()) {
        Sink s(c.out, out);
        *s << "u,v,singular,g11,g12,g22,h11,h12,h22,H,K,class\n";
        for (const auto& p : samples) {
            const auto& f = p.forms;
            *s << fmt(p.u) << ',' << fmt(p.v) << ',' << (p.singular ? 1 : 0) << ',' << fmt(f.g11) << ','
               << fmt(f.g12) << ',' << fmt(f.g22) << ',' << fmt(f.h11) << ',' << fmt(f.h12) << ',' << fmt(f.h22)
               << ',' << fmt(p.H) << ',' << fmt(p.K) << ','
               << (p.singular ? std::string_view("singular") : to_string(p.cls)) << '\n';
        }
    }

    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["source"] = src.label;
    j["samples"] = samples.size();
    j["singular_samples"] = singular;
    j["H"] = {{"min", Hmin}, {"max", Hmax}};
    j["K"] = {{"min", Kmin}, {"max", Kmax}};
    j["classes"] = {{"elliptic", counts[static_cast<int>(PointClass::elliptic)]},
                    {"hyperbolic", counts[static_cast<int>(PointClass::hyperbolic)]},
                    {"parabolic", counts[static_cast<int>(PointClass::parabolic)]}};
    j["codazzi_max"] = codazzi;
    j["tol"] = tol;
    j["d_minimal"] = std::max(std::abs(Hmin), std::abs(Hmax)) <= tol;
    Sink s(c.summary, out);
    *s << j.dump(2) << '\n';
    return ok;
}

inline int cmd_singular(const RunConfig& c, std::ostream& out) {
    const WeierstrassData d = data_of(c);
    SingularOptions opt;
    opt.grid = grid_of(c, {64, 64});
    opt.tol = tol_of(c, 1e-10);
    const auto pts = singular_report(d, opt);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : pts) {
        nlohmann::ordered_json e;
        e["re"] = p.w.real() == 0.0 ? 0.0 : p.w.real();
        e["im"] = p.w.imag() == 0.0 ? 0.0 : p.w.imag();
        e["multiplicity"] = p.multiplicity;
        e["rank"] = p.rank;
        e["g_vanishes"] = p.g_vanishes;
        e["refined"] = p.refined;
        arr.push_back(e);
    }
    Sink s(c.out, out);
    *s << arr.dump(2) << '\n';
    return ok;
}

inline int cmd_reconstruct(const RunConfig& c, std::ostream& out) {
    const bool exprs = !c.h11.empty() || !c.h12.empty() || !c.h22.empty();
    if (exprs == !c.csv_in.empty())
        throw CLI::ValidationError("input", "give either --h11/--h12/--h22 or --csv");
    std::optional<PrescribedForms> p;
    if (exprs) {
        if (c.h11.empty() || c.h12.empty() || c.h22.empty())
            throw CLI::ValidationError("--h11/--h12/--h22", "all three expressions are required");
        p.emplace(PrescribedForms::parse(c.h11, c.h12, c.h22, domain_of(c)));
    } else {
        std::ifstream in(c.csv_in);
        if (!in) throw CLI::ValidationError("--csv", "cannot open " + c.csv_in);
        p.emplace(read_forms_csv(in));
    }
    ReconstructOptions o;
    o.codazzi_tol = tol_of(c, 1e-7);
    o.base = base_of(c, p->domain());
    if (!c.seed.empty()) {
        const auto s = numbers(c.seed, 3, "--seed");
        o.seed = {s[0], s[1], s[2]};
    }
    const auto rep = codazzi_check(*p, o.check_grid, o.codazzi_tol);
    out << "codazzi_residual " << fmt(rep.max_residual) << '\n' << "verdict " << (rep.pass ? "pass" : "fail") << '\n';
    out.flush();
    const GridSpec g = p->is_grid() ? p->samples().grid : grid_of(c, {64, 64});
    const HeightGrid hg = integrate_hessian(*p, g, o);  // throws CodazziError before any output file exists
    std::vector<Vec021> pts(g.size());
    for (int j = 0; j < g.nv; ++j)
        for (int i = 0; i < g.nu; ++i) {
            auto [u, v] = grid_node(hg.domain, g, i, j);
            const std::size_t k = static_cast<std::size_t>(j) * g.nu + i;
            pts[k] = {u, v, hg.F[k]};
        }
    RunConfig mc = c;
    if (mc.format.empty()) mc.format = "csv";
    write_mesh(mc, out, hg.domain, g, pts);
    return ok;
}

inline int cmd_embed(const RunConfig& c, std::ostream& out) {
    const bool mink = !c.x1.empty() || !c.x2.empty() || !c.x3.empty() || !c.x4.empty();
    FlatZmcOptions opt;
    opt.grid = grid_of(c, {16, 16});
    opt.tol = tol_of(c, 1e-5);
    nlohmann::ordered_json j;
    j["schema"] = 1;
    std::optional<MinkSurface> m;
    std::optional<SurfacePatch> patch;
    if (mink) {
        if (c.x1.empty() || c.x2.empty() || c.x3.empty() || c.x4.empty())
            throw CLI::ValidationError("--x1..--x4", "all four coordinates are required");
        m.emplace(mink_from_exprs(c.x1, c.x2, c.x3, c.x4, domain_of(c)));
        j["source"] = "minkowski";
    } else {
        const Source src = source_of(c);
        patch.emplace(src.patch);
        m.emplace(embed(src.patch));
        j["source"] = src.label;
    }
    const auto rep = verify_flat_zmc(*m, opt);
    if (!rep.violations.empty()) {
        throw NonSpacelikeError(std::to_string(rep.violations.size()) + " non-spacelike samples, first at (" +
                                fmt(rep.violations.front().first) + ", " + fmt(rep.violations.front().second) + ")");
    }
    j["samples"] = rep.samples;
    j["max_H"] = rep.max_H;
    j["max_K"] = rep.max_K;
    j["tol"] = opt.tol;
    j["pass"] = rep.pass;
    if (patch) {
        const auto locus = vanishing_h_locus(*patch);
        nlohmann::ordered_json e = nlohmann::ordered_json::array();
        for (const auto& cl : locus.clusters)
            e.push_back({{"u", cl.u == 0.0 ? 0.0 : cl.u},
                         {"v", cl.v == 0.0 ? 0.0 : cl.v},
                         {"size", cl.size},
                         {"isolated", cl.isolated}});
        j["e_locus"] = e;
        j["e_locus_isolated"] = locus.all_isolated();
    }
    Sink s(c.out, out);
    *s << j.dump(2) << '\n';
    return ok;
}

inline int cmd_catalog(std::ostream& out) {
    for (const auto& n : catalog::names()) out << n << '\n';
    return ok;
}

} // namespace detail

/// Runs one command; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"d-minimal surface toolkit for R^{0,2,1}", "dmin"};
    app.require_subcommand(1);
    RunConfig c;

    auto source_flags = [&](CLI::App* s) {
        s->add_option("--F", c.F, "Weierstrass F(z)");
        s->add_option("--G", c.G, "Weierstrass G(z)");
        s->add_option("--theta", c.theta, "associated-family angle");
        s->add_option("--base", c.base, "integration base point re,im");
        s->add_option("--catalog", c.catalog, "catalog surface name");
        s->add_option("--lambda", c.lambda, "parameter of dlambda_geodesic");
        s->add_option("--graph", c.graph, "graph height expression in u, v");
    };
    auto common = [&](CLI::App* s) {
        s->add_option("--domain", c.domain, "u0,u1,v0,v1");
        s->add_option("--grid", c.grid, "N,M");
        s->add_option("--tol", c.tol, "tolerance");
        s->add_option("--out", c.out, "output path (default: standard output)");
        s->add_option("--format", c.format, "obj|csv|json");
    };

    auto* gen = app.add_subcommand("gen", "sample a Weierstrass surface to a mesh");
    common(gen);
    gen->add_option("--F", c.F, "Weierstrass F(z)")->required();
    gen->add_option("--G", c.G, "Weierstrass G(z)")->required();
    gen->add_option("--theta", c.theta, "associated-family angle");
    gen->add_option("--base", c.base, "integration base point re,im");

    auto* analyze = app.add_subcommand("analyze", "forms, curvature and point classes on a grid");
    common(analyze);
    source_flags(analyze);
    analyze->add_option("--summary", c.summary, "JSON summary path (default: standard output)");
    analyze->add_option("--max-singular", c.max_singular, "allowed number of degenerate samples");

    auto* singular = app.add_subcommand("singular", "singular points of Weierstrass data");
    common(singular);
    singular->add_option("--F", c.F, "Weierstrass F(z)")->required();
    singular->add_option("--G", c.G, "Weierstrass G(z)")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "graph surface from a prescribed second form");
    common(reconstruct);
    reconstruct->add_option("--h11", c.h11);
    reconstruct->add_option("--h12", c.h12);
    reconstruct->add_option("--h22", c.h22);
    reconstruct->add_option("--csv", c.csv_in, "CSV with header u,v,h11,h12,h22");
    reconstruct->add_option("--base", c.base, "base point u,v");
    reconstruct->add_option("--seed", c.seed, "F0,Fu0,Fv0 at the base point");

    auto* embed_cmd = app.add_subcommand("embed", "flat zero-mean-curvature check in Minkowski 4-space");
    common(embed_cmd);
    source_flags(embed_cmd);
    embed_cmd->add_option("--x1", c.x1);
    embed_cmd->add_option("--x2", c.x2);
    embed_cmd->add_option("--x3", c.x3);
    embed_cmd->add_option("--x4", c.x4);

    auto* cat = app.add_subcommand("catalog", "catalog operations");
    cat->add_subcommand("list", "list surface names");
    cat->require_subcommand(1);

    // CLI11 parses a reversed argument vector.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        // --help prints and succeeds; every other flag error is a usage error
        return app.exit(e, out, err) == 0 ? ok : usage;
    }

    try {
        if (*gen) return detail::cmd_gen(c, out);
        if (*analyze) return detail::cmd_analyze(c, out);
        if (*singular) return detail::cmd_singular(c, out);
        if (*reconstruct) return detail::cmd_reconstruct(c, out);
        if (*embed_cmd) return detail::cmd_embed(c, out);
        if (*cat) return detail::cmd_catalog(out);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return parse_error;
    } catch (const IntegrationError& e) {
        err << "error: " << e.what() << '\n';
        return integration_error;
    } catch (const DegenerateMetricError& e) {
        err << "error: " << e.what() << '\n';
        return degenerate;
    } catch (const NonSpacelikeError& e) {
        err << "error: " << e.what() << '\n';
        return degenerate;
    } catch (const CodazziError& e) {
        err << "error: " << e.what() << '\n';
        return codazzi_failure;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    return usage;
}

} // namespace dmin::cli
