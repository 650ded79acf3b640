#include "dmin/singular.hpp"

#include "gen.hpp"

#include <gtest/gtest.h>

#include <cstdio>

using namespace dmin;

namespace {

const Rect unit{-1, 1, -1, 1};

WeierstrassData data(const std::string& F, const std::string& G, Rect dom = unit) {
    return {parse_expr(F), parse_expr(G), 0.0, dom, {}};
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string("(") + buf + ")";
}

struct Planted {
    std::vector<Complex> roots;
    std::vector<int> mult;
    std::string text;
};

/// Random monic polynomial of degree <= 5 with separated roots in [-0.8, 0.8]^2.
Planted plant(testgen::Rng& rng, bool simple) {
    Planted p;
    const int target = rng.int_in(1, 5);
    int degree = 0;
    while (degree < target) {
        const Complex r = rng.complex_in(0.8);
        bool ok = true;
        for (Complex q : p.roots) ok = ok && std::abs(q - r) >= 0.2;
        if (!ok) continue;
        const int m = simple ? 1 : std::min(rng.int_in(1, 3), target - degree);
        p.roots.push_back(r);
        p.mult.push_back(m);
        degree += m;
    }
    for (std::size_t k = 0; k < p.roots.size(); ++k) {
        if (!p.text.empty()) p.text += " * ";
        p.text += "(z - " + num(p.roots[k].real()) + " - " + num(p.roots[k].imag()) + "*i)";
        if (p.mult[k] > 1) p.text += "^" + std::to_string(p.mult[k]);
    }
    return p;
}

} // namespace

TEST(FindZeros, Examples) {
    const auto a = find_zeros(parse_expr("z"), unit);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_LT(std::abs(a[0].w), 1e-12);
    EXPECT_TRUE(a[0].refined);

    const auto b = find_zeros(parse_expr("z^2 - 0.25"), unit);
    ASSERT_EQ(b.size(), 2u);
    std::vector<double> re{b[0].w.real(), b[1].w.real()};
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], -0.5, 1e-12);
    EXPECT_NEAR(re[1], 0.5, 1e-12);
    for (const auto& c : b) EXPECT_NEAR(c.w.imag(), 0.0, 1e-12);

    EXPECT_TRUE(find_zeros(parse_expr("exp(z)"), unit).empty());
}

TEST(FindZeros, ZeroBetweenGridNodes) {
    // 64 nodes on [-1, 1] never hit 0.013 + 0.021i
    const auto z = find_zeros(parse_expr("z - 0.013 - 0.021*i"), unit);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_LT(std::abs(z[0].w - Complex(0.013, 0.021)), 1e-12);
}

TEST(FindZeros, OutsideDomainIgnored) {
    EXPECT_TRUE(find_zeros(parse_expr("z - 3"), unit).empty());
}

TEST(FindZeros, MultipleRootIsOneCandidate) {
    const auto z = find_zeros(parse_expr("(z - 0.3)^3"), unit);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_LT(std::abs(z[0].w - 0.3), 1e-4);
}

TEST(Multiplicity, Examples) {
    EXPECT_EQ(zero_multiplicity(parse_expr("z"), 0.0, 0.5), 1);
    EXPECT_EQ(zero_multiplicity(parse_expr("z^4"), 0.0, 0.5), 4);
    EXPECT_EQ(zero_multiplicity(parse_expr("z^2 - 0.25"), 0.5, 0.1), 1);
    EXPECT_EQ(zero_multiplicity(parse_expr("exp(z)"), 0.0, 0.5), 0);
}

TEST(Multiplicity, ContourThroughZero) {
    EXPECT_THROW(zero_multiplicity(parse_expr("z - 0.5"), 0.0, 0.5), ContourError);
    EXPECT_THROW(zero_multiplicity(parse_expr("z"), 0.0, -1.0), std::invalid_argument);
}

TEST(Rank, Examples) {
    EXPECT_EQ(jacobian_rank_at(data("z", "1"), 0.0), 1);
    EXPECT_EQ(jacobian_rank_at(data("z", "z^2"), 0.0), 0);
    testgen::Rng rng(3);
    for (int n = 0; n < 10; ++n) EXPECT_EQ(jacobian_rank_at(data("exp(z)", "1"), rng.complex_in(0.9)), 2);
}

TEST(Rank, SingularValuesMatchData) {
    // sigma_min = |F| and sigma_max = sqrt(|F|^2 + |G|^2) for the (F, -iF, G) construction
    const auto d = data("z + 0.5", "exp(z)");
    const Complex w(0.2, -0.4);
    const auto r = jacobian_rank_info(d, w);
    const double aF = std::abs(w + 0.5), aG = std::abs(std::exp(w));
    EXPECT_NEAR(r.sigma_min, aF, 1e-8);
    EXPECT_NEAR(r.sigma_max, std::hypot(aF, aG), 1e-8);
    EXPECT_EQ(r.analytic, r.numeric);
}

TEST(Report, Examples) {
    const auto a = singular_report(data("z^2", "1"), unit);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_LT(std::abs(a[0].w), 1e-6);
    EXPECT_EQ(a[0].multiplicity, 2);
    EXPECT_EQ(a[0].rank, 1);
    EXPECT_FALSE(a[0].g_vanishes);

    const auto b = singular_report(data("z^2", "z"), unit);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].multiplicity, 2);
    EXPECT_EQ(b[0].rank, 0);
    EXPECT_TRUE(b[0].g_vanishes);

    EXPECT_TRUE(singular_report(data("1", "z"), unit).empty());
}

TEST(Report, HigherOrderFigures) {
    for (int n = 1; n <= 4; ++n) {
        const auto r = singular_report(data("z^" + std::to_string(n), "1"), unit);
        ASSERT_EQ(r.size(), 1u) << n;
        EXPECT_EQ(r[0].multiplicity, n);
        EXPECT_EQ(r[0].rank, 1);
    }
    const auto r = singular_report(data("z", "z^2"), unit);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rank, 0);
    EXPECT_EQ(r[0].multiplicity, 1);
}

TEST(Report, SortedByModulus) {
    const auto r = singular_report(data("(z - 0.7)*(z + 0.2*i)*(z - 0.4 - 0.4*i)", "1"), unit);
    ASSERT_EQ(r.size(), 3u);
    for (std::size_t k = 1; k < r.size(); ++k) EXPECT_LE(std::abs(r[k - 1].w), std::abs(r[k].w));
    EXPECT_LT(std::abs(r[0].w - Complex(0, -0.2)), 1e-12);
}

TEST(Report, NearbyZeroOfGIsNotCoincident) {
    // G vanishes 1e-7 away from F's zero: |G| is inside the tie band, but
    // the refined zeros are distinct, so the rank stays 1.
    const auto r = singular_report(data("z", "z - 1e-7"), unit);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_FALSE(r[0].g_vanishes);
    EXPECT_EQ(r[0].rank, 1);
}

// ---------------------------------------------------------------------------
// Properties

TEST(Property, PlantedSimpleRootsAreRecovered) {
    testgen::Rng rng(0x5100);
    for (int n = 0; n < 50; ++n) {
        const Planted p = plant(rng, true);
        const auto z = find_zeros(parse_expr(p.text), unit);
        ASSERT_EQ(z.size(), p.roots.size()) << p.text;
        for (Complex r : p.roots) {
            double best = 1e300;
            for (const auto& c : z) best = std::min(best, std::abs(c.w - r));
            EXPECT_LT(best, 1e-8) << p.text;
        }
    }
}

TEST(Property, PlantedMultiplicities) {
    testgen::Rng rng(0x3011);
    for (int n = 0; n < 50; ++n) {
        const Planted p = plant(rng, false);
        const Expr F = parse_expr(p.text);
        for (std::size_t k = 0; k < p.roots.size(); ++k) EXPECT_EQ(zero_multiplicity(F, p.roots[k], 0.09), p.mult[k]) << p.text;
        // the report finds the same roots and multiplicities
        const auto r = singular_report({F, parse_expr("1"), 0.0, unit, {}}, unit);
        ASSERT_EQ(r.size(), p.roots.size()) << p.text;
        for (std::size_t k = 0; k < p.roots.size(); ++k) {
            std::size_t best = 0;
            for (std::size_t m = 1; m < r.size(); ++m)
                if (std::abs(r[m].w - p.roots[k]) < std::abs(r[best].w - p.roots[k])) best = m;
            EXPECT_LT(std::abs(r[best].w - p.roots[k]), 1e-4) << p.text;
            EXPECT_EQ(r[best].multiplicity, p.mult[k]) << p.text;
        }
    }
}

TEST(Property, RankPathsAgreeAtRegularPoints) {
    testgen::Rng rng(0x7A4C);
    const std::vector<std::pair<std::string, std::string>> pool{
        {"exp(z)", "1"}, {"z + 2", "z^2"}, {"cosh(z)", "sin(z)"}, {"(z - 3*i)^2", "exp(-z)"}, {"1", "z"}};
    for (int n = 0; n < 100; ++n) {
        const auto& [F, G] = pool[static_cast<std::size_t>(rng.int_in(0, 4))];
        const auto d = data(F, G);
        const auto r = jacobian_rank_info(d, rng.complex_in(0.9));
        EXPECT_EQ(r.analytic, 2);
        EXPECT_EQ(r.numeric, 2);
    }
}

TEST(Property, RankPathsAgreeAtReportedPoints) {
    for (auto [F, G] : {std::pair{"z", "1"}, std::pair{"z^2", "z"}, std::pair{"z^3", "1"}, std::pair{"z", "z^2"},
                        std::pair{"z^2 - 0.25", "z - 0.5"}}) {
        const auto d = data(F, G);
        for (const auto& p : singular_report(d, unit)) {
            if (!p.refined) continue;
            const auto r = jacobian_rank_info(d, p.w);
            EXPECT_EQ(r.analytic, r.numeric) << F << ", " << G;
        }
    }
}

TEST(Property, RefinedZerosAreIsolated) {
    testgen::Rng rng(0x150);
    const double tol = 1e-10;
    for (int n = 0; n < 30; ++n) {
        const Planted p = plant(rng, true);
        const auto z = find_zeros(parse_expr(p.text), unit, {64, 64}, tol);
        for (std::size_t a = 0; a < z.size(); ++a)
            for (std::size_t b = a + 1; b < z.size(); ++b) EXPECT_GT(std::abs(z[a].w - z[b].w), 10 * tol);
    }
}
