#include "dmin/expr.hpp"
#include "dmin/weierstrass.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <numbers>
#include <thread>

using namespace dmin;

namespace {

const double pi = std::numbers::pi;

Complex at(const std::string& src, Complex z) { return eval(parse_expr(src), z); }

} // namespace

TEST(Parse, QuadraticVanishesAtI) {
    EXPECT_LT(std::abs(at("z^2 + 1", {0, 1})), 1e-15);
}

TEST(Parse, EulerIdentity) {
    const Complex r = at("exp(z)", {0, pi});
    EXPECT_NEAR(r.real(), -1.0, 1e-15);
    EXPECT_NEAR(r.imag(), 0.0, 1e-15);
}

TEST(Parse, IncompleteInputReportsOffset) {
    try {
        parse_expr("z +");
        FAIL() << "no error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 3u);
        const auto& ex = e.expected();
        EXPECT_NE(std::find(ex.begin(), ex.end(), "number"), ex.end());
        EXPECT_NE(std::find(ex.begin(), ex.end(), "identifier"), ex.end());
    }
}

TEST(Parse, Errors) {
    EXPECT_THROW(parse_expr(""), ParseError);
    EXPECT_THROW(parse_expr("(z"), ParseError);
    EXPECT_THROW(parse_expr("z z"), ParseError);
    EXPECT_THROW(parse_expr("exp z"), ParseError);
    EXPECT_THROW(parse_expr("2 ** z"), ParseError);
    try {
        parse_expr("z + foo");
        FAIL() << "no error";
    } catch (const UnknownIdentifierError& e) {
        EXPECT_EQ(e.offset(), 4u);
        EXPECT_EQ(e.name(), "foo");
    }
    // u, v and i are not available in the complex grammar / real grammar respectively
    EXPECT_THROW(parse_expr("u"), UnknownIdentifierError);
    EXPECT_THROW(parse_real_expr("i*u"), UnknownIdentifierError);
}

TEST(Parse, WhitespaceInsensitive) {
    EXPECT_TRUE(structurally_equal(parse_expr("  z ^ 2+1 "), parse_expr("z^2+1")));
    EXPECT_TRUE(structurally_equal(parse_expr("exp ( z )"), parse_expr("exp(z)")));
}

TEST(Parse, PowerBindsTighterThanUnaryMinusAndIsRightAssociative) {
    EXPECT_EQ(at("-z^2", 2.0), Complex(-4.0));
    EXPECT_EQ(at("2^3^2", 0.0), Complex(512.0));
    EXPECT_EQ(at("2^-1", 0.0), Complex(0.5));
    EXPECT_EQ(at("1 - 2 - 3", 0.0), Complex(-4.0));
    EXPECT_EQ(at("8 / 2 / 2", 0.0), Complex(2.0));
    EXPECT_EQ(at("2 + 3 * z", 2.0), Complex(8.0));
}

TEST(Parse, Constants) {
    EXPECT_EQ(at("pi", 0.0), Complex(pi));
    EXPECT_EQ(at("e", 0.0), Complex(std::numbers::e));
    EXPECT_EQ(at("i", 0.0), Complex(0.0, 1.0));
    EXPECT_EQ(at("1.5e2", 0.0), Complex(150.0));
}

TEST(Eval, Examples) {
    EXPECT_EQ(at("z^3", 2.0), Complex(8.0));
    const Complex l = at("log(z)", -1.0);
    EXPECT_NEAR(l.real(), 0.0, 1e-15);
    EXPECT_NEAR(l.imag(), pi, 1e-15);
}

TEST(Eval, FailuresAreExplicit) {
    try {
        at("1/z", 0.0);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), EvalErrorKind::division_by_zero);
    }
    try {
        at("log(z)", 0.0);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), EvalErrorKind::domain);
    }
    try {
        at("exp(z)", 1000.0);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.kind(), EvalErrorKind::overflow);
    }
    EXPECT_THROW(at("z^(-1)", 0.0), EvalError);
}

TEST(Eval, PrincipalBranchPowers) {
    const Complex r = at("z^0.5", -4.0);
    EXPECT_NEAR(r.real(), 0.0, 1e-15);
    EXPECT_NEAR(r.imag(), 2.0, 1e-15);
    EXPECT_EQ(at("z^2", Complex(1, 1)), Complex(0, 2));
    EXPECT_EQ(at("0^0", 0.0), Complex(1.0));
}

TEST(Eval, RealGrammar) {
    const Expr e = parse_real_expr("u^2 + v");
    EXPECT_EQ(eval_real(e, 1.0, 2.0), 3.0);
    EXPECT_THROW(eval_real(parse_real_expr("log(u)"), -1.0, 0.0), EvalError);  // imaginary part
}

TEST(Differentiate, Examples) {
    EXPECT_EQ(eval(differentiate(parse_expr("z^3")), 2.0), Complex(12.0));
    for (Complex w : {Complex(0.3, -0.2), Complex(-1, 2), Complex(2, 0.5)}) {
        const Complex d = eval(differentiate(parse_expr("exp(z)")), w);
        EXPECT_LT(std::abs(d - std::exp(w)), 1e-14 * std::abs(std::exp(w)));
    }
    const Expr c = differentiate(parse_expr("3 + 2*i"));
    for (Complex w : {Complex(0), Complex(5, -1)}) EXPECT_EQ(eval(c, w), Complex(0.0));
}

TEST(Differentiate, PartialsInRealGrammar) {
    const Expr e = parse_real_expr("u*v^2");
    EXPECT_EQ(eval_real(differentiate(e, 0), 2.0, 3.0), 9.0);
    EXPECT_EQ(eval_real(differentiate(e, 1), 2.0, 3.0), 12.0);
    EXPECT_FALSE(parse_real_expr("u^2").depends_on(1));
}

TEST(Differentiate, VariableExponent) {
    // d/dz 2^z = log 2 * 2^z
    const Complex w(0.4, 0.3);
    const Complex d = eval(differentiate(parse_expr("2^z")), w);
    EXPECT_LT(std::abs(d - std::log(2.0) * std::pow(2.0, w)), 1e-14);
    // d/dz z^z = z^z (log z + 1)
    const Complex d2 = eval(differentiate(parse_expr("z^z")), w);
    EXPECT_LT(std::abs(d2 - std::exp(w * std::log(w)) * (std::log(w) + 1.0)), 1e-13);
}

TEST(CauchyRiemann, Examples) {
    EXPECT_LT(cauchy_riemann_residual(parse_expr("z^2"), {1, 1}, 1e-4), 1e-6);
    EXPECT_LT(cauchy_riemann_residual(parse_expr("exp(z)"), {0.3, -0.7}, 1e-4), 1e-6);
}

TEST(CauchyRiemann, StencilAcrossBranchCutIsFlagged) {
    // The vertical stencil points -1 +- 0.01i lie on both sides of the cut;
    // log jumps by 2 pi i there, so the residual is about 2 pi / (2 * 0.01).
    const double r = cauchy_riemann_residual(parse_expr("log(z)"), {-1, 0.001}, 0.01);
    const Complex jump = at("log(z)", {-1, 0.011}) - at("log(z)", {-1, -0.009});
    EXPECT_NEAR(jump.imag(), 2.0 * pi, 0.05);
    EXPECT_GT(r, 100.0);
}

// ---------------------------------------------------------------------------
// Properties over generated expressions

namespace {

/// True when w +- h (real or imaginary direction) stays off every branch cut.
bool off_cuts(const Expr& e, Complex w, double h) {
    std::vector<Expr> args;
    dmin::detail::collect_branch_args(e, args);
    for (const Expr& a : args)
        for (Complex d : {Complex(h, 0), Complex(0, h)})
            if (dmin::detail::crosses_cut(a, w - d, w + d)) return false;
    return true;
}

} // namespace

TEST(Property, DerivativeMatchesCentralDifference) {
    testgen::Rng rng(0xD1FF);
    int checked = 0, skipped = 0;
    const double h = 1e-5;
    for (int n = 0; n < 1000; ++n) {
        const std::string src = testgen::random_expr(rng, 3);
        const Expr e = parse_expr(src);
        const Expr d = differentiate(e);
        const Complex w = rng.complex_in(1.5);
        Complex fd, exact;
        try {
            fd = (eval(e, w + h) - eval(e, w - h)) / (2.0 * h);
            exact = eval(d, w);
        } catch (const EvalError&) {
            ++skipped;
            continue;
        }
        if (std::abs(eval(e, w)) > 1e4 || !off_cuts(e, w, h)) {
            ++skipped;
            continue;
        }
        ++checked;
        EXPECT_LE(std::abs(exact - fd), 1e-5 * std::max(1.0, std::abs(exact))) << src << " at " << w;
    }
    EXPECT_GE(checked, 900);
    EXPECT_LE(skipped, 100);
}

TEST(Property, CauchyRiemannAwayFromCuts) {
    testgen::Rng rng(0xC0C0);
    int checked = 0;
    for (int n = 0; n < 500; ++n) {
        const std::string src = testgen::random_expr(rng, 3);
        const Expr e = parse_expr(src);
        const Complex w = rng.complex_in(1.5);
        try {
            if (std::abs(eval(e, w)) > 1e3 || !off_cuts(e, w, 1e-4)) continue;
            // Near a pole the third derivative blows up and so does the
            // stencil's truncation error (about h^2 |f'''| / 6).
            if (std::abs(eval(differentiate(differentiate(differentiate(e))), w)) > 50.0) continue;
            const double r = cauchy_riemann_residual(e, w, 1e-4);
            ++checked;
            EXPECT_LT(r, 1e-6) << src << " at " << w;
        } catch (const EvalError&) {
        }
    }
    EXPECT_GE(checked, 400);
}

TEST(Property, PrintParseRoundTrip) {
    std::vector<std::string> corpus{"z",          "z^2 + 1",        "-z^2",          "2^3^2",
                                    "exp(z)",     "log(z)",         "sin(z)*cos(z)", "sinh(z) - cosh(z)",
                                    "1/(z - i)",  "(z + 1)^(1/3)",  "z^0.5",         "-(-z)",
                                    "pi*z + e",   "i*z^3 - 2*i",    "exp(-z^2/2)",   "3.25e-3 * z"};
    testgen::Rng rng(0x5EED);
    while (corpus.size() < 50) corpus.push_back(testgen::random_expr(rng, 3));
    for (const auto& src : corpus) {
        const Expr a = parse_expr(src);
        const std::string printed = to_string(a);
        const Expr b = parse_expr(printed);
        EXPECT_TRUE(structurally_equal(a, b)) << src << " -> " << printed;
        EXPECT_EQ(to_string(b), printed);
    }
}

TEST(Concurrency, SharedTreeEvaluatesIdentically) {
    const Expr e = parse_expr("exp(z)*sin(z^2) + log(z + 3)");
    const Complex w(0.2, 0.7);
    const Complex ref = eval(e, w);
    std::vector<Complex> got(8);
    std::vector<std::thread> ts;
    for (int t = 0; t < 8; ++t)
        ts.emplace_back([&, t] {
            for (int k = 0; k < 200; ++k) got[t] = eval(differentiate(e), w) * 0.0 + eval(e, w);
        });
    for (auto& t : ts) t.join();
    for (const auto& g : got) EXPECT_EQ(g, ref);
}
