#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>
#include <gtest/gtest.h>

#include "bfw/theory.hpp"

namespace {

namespace th = bfw::theory;

// Closed form of the root of 1 - x = exp(-2x/alpha) through the principal
// Lambert W branch: x = 1 + (alpha/2) W0(-(2/alpha) exp(-2/alpha)).
double lambert_root(double alpha) {
    const double a = 2.0 / alpha;
    return 1.0 + boost::math::lambert_w0(-a * std::exp(-a)) / a;
}

TEST(PredictM, Intervals) {
    EXPECT_EQ(th::predict_m(0.4), 2);
    EXPECT_EQ(th::predict_m(0.2), 5);
    EXPECT_EQ(th::predict_m(1.0), 1);
    EXPECT_EQ(th::predict_m(0.5), 2);
    EXPECT_EQ(th::predict_m(0.50001), 1);
    EXPECT_EQ(th::predict_m(1.0 / 3), 3);
    EXPECT_EQ(th::predict_m(0.8), 1);
    EXPECT_EQ(th::predict_m(0.45), 2);
    EXPECT_EQ(th::predict_m(0.30), 3);
    EXPECT_EQ(th::predict_m(0.22), 4);
    EXPECT_EQ(th::predict_m(0.18), 5);
    EXPECT_THROW(th::predict_m(0.0), bfw::ConfigError);
    EXPECT_THROW(th::predict_m(-0.1), bfw::ConfigError);
    EXPECT_THROW(th::predict_m(1.01), bfw::ConfigError);
}

TEST(PredictM, ConsistentWithIntervalUpperEnds) {
    for (int m = 1; m <= 100; ++m) EXPECT_EQ(th::predict_m(th::alpha_upper(m)), m) << m;
}

TEST(AlphaUpper, Values) {
    EXPECT_DOUBLE_EQ(th::alpha_upper(4), 0.25);
    EXPECT_DOUBLE_EQ(th::alpha_upper(2, true), 0.52);
    EXPECT_DOUBLE_EQ(th::alpha_upper(2, false), 0.5);
    EXPECT_DOUBLE_EQ(th::alpha_upper(3, true), 1.0 / 3);
    EXPECT_DOUBLE_EQ(th::alpha_upper(1), 1.0);
    EXPECT_THROW(th::alpha_upper(0), bfw::ConfigError);
}

TEST(GiantFraction, MatchesLambertOracleAndResidual) {
    for (int i = 1; i <= 100; ++i) {
        const double alpha = i / 100.0;
        const double x = th::solve_giant_fraction(alpha);
        EXPECT_LT(std::abs(th::giant_fraction_residual(x, alpha)), 1e-12) << alpha;
        EXPECT_NEAR(x, lambert_root(alpha), 1e-10) << alpha;
        EXPECT_GT(x, 0.0);
        EXPECT_LE(x, 1.0);
    }
}

TEST(GiantFraction, TabulatedValues) {
    EXPECT_NEAR(th::solve_giant_fraction(0.5), 0.9802, 5e-5);
    EXPECT_NEAR(th::solve_giant_fraction(1.0 / 3), 0.9975, 5e-5);
    EXPECT_NEAR(th::solve_giant_fraction(0.25), 0.9997, 5e-5);
    // 0.99995458 sits on the rounding edge of the tabulated 0.9999.
    EXPECT_NEAR(th::solve_giant_fraction(0.2), 0.9999, 1e-4);
}

// Below alpha ~ 0.07 the root is within an ulp of 1, where order is only up to rounding.
TEST(GiantFraction, MonotoneDecreasingInAlpha) {
    double prev = 2.0;
    for (int i = 1; i <= 1000; ++i) {
        const double x = th::solve_giant_fraction(i / 1000.0);
        if (1.0 - x > 1e-13)
            EXPECT_LT(x, prev) << i;
        else
            EXPECT_LE(x, prev + std::numeric_limits<double>::epsilon()) << i;
        prev = x;
    }
}

TEST(GiantFraction, TendsToOneAsAlphaVanishes) {
    EXPECT_NEAR(th::solve_giant_fraction(0.05), 1.0, 1e-12);
    EXPECT_NEAR(th::solve_giant_fraction(1e-4), 1.0, 1e-15);
    EXPECT_THROW(th::solve_giant_fraction(0.0), bfw::ConfigError);
    EXPECT_THROW(th::solve_giant_fraction(0.5, 0.0), bfw::ConfigError);
    EXPECT_THROW(th::solve_giant_fraction(1.5), bfw::ConfigError);
}

TEST(SolvePair, ClosedForm) {
    const auto p = th::solve_pair(1.0, 0.52);
    EXPECT_NEAR(p.larger + p.smaller, 1.0, 1e-15);
    EXPECT_NEAR(p.larger * p.larger + p.smaller * p.smaller, 0.52, 1e-15);
    EXPECT_NEAR(p.larger, 0.6, 1e-15);
    EXPECT_NEAR(p.smaller, 0.4, 1e-15);
    // Symmetric point: sum of squares s^2/2 gives equal halves.
    const auto eq = th::solve_pair(0.9, 0.405);
    EXPECT_NEAR(eq.larger, 0.45, 1e-8);
    EXPECT_NEAR(eq.smaller, 0.45, 1e-8);
    EXPECT_LT(th::solve_pair(1.0, 0.4).discriminant, 0.0);
}

TEST(SolveSizes, SingleGiantCarriesAllOfX) {
    th::TheoryOptions at_alpha;
    at_alpha.x_at_given_alpha = true;
    const auto p = th::solve_sizes(1, 0.8, at_alpha);
    ASSERT_EQ(p.fractions.size(), 1u);
    EXPECT_DOUBLE_EQ(p.fractions[0], th::solve_giant_fraction(0.8));
    EXPECT_LT(std::abs(1.0 - p.fractions[0] - std::exp(-2.0 * p.fractions[0] / 0.8)), 1e-12);
    EXPECT_FALSE(p.residuals.sum_sq.has_value());

    const auto def = th::solve_sizes(1, 0.8);
    EXPECT_DOUBLE_EQ(def.fractions[0], th::solve_giant_fraction(1.0));
}

TEST(SolveSizes, TwoGiantsEmpirical) {
    th::TheoryOptions opt;
    opt.empirical_alpha2 = true;
    const auto p = th::solve_sizes(2, 0.5, opt);
    const double x = th::solve_giant_fraction(0.52);
    ASSERT_EQ(p.fractions.size(), 2u);
    const double root = std::sqrt(2 * 0.52 - x * x);
    EXPECT_NEAR(p.fractions[0], (x + root) / 2, 1e-15);
    EXPECT_NEAR(p.fractions[1], (x - root) / 2, 1e-15);
    // Substitution into both constraints.
    EXPECT_LT(std::abs(p.fractions[0] + p.fractions[1] - x), 1e-12);
    EXPECT_LT(std::abs(p.fractions[0] * p.fractions[0] + p.fractions[1] * p.fractions[1] - 0.52), 1e-12);
}

TEST(SolveSizes, TwoGiantsMatchGridSearch) {
    for (bool empirical : {false, true}) {
        th::TheoryOptions opt;
        opt.empirical_alpha2 = empirical;
        const auto p = th::solve_sizes(2, 0.5, opt);
        const double x = p.x_m, q = p.alpha_m;
        // Minimise squared violation over C1 >= C2 > 0 on a 1e-3 grid.
        double best = std::numeric_limits<double>::infinity(), b1 = 0, b2 = 0;
        for (int i = 1; i <= 1000; ++i)
            for (int j = 1; j <= i; ++j) {
                const double c1 = i / 1000.0, c2 = j / 1000.0;
                const double v = std::pow(c1 + c2 - x, 2) + std::pow(c1 * c1 + c2 * c2 - q, 2);
                if (v < best) {
                    best = v;
                    b1 = c1;
                    b2 = c2;
                }
            }
        EXPECT_NEAR(p.fractions[0], b1, 2e-3);
        EXPECT_NEAR(p.fractions[1], b2, 2e-3);
    }
}

TEST(SolveSizes, EveryFeasibleOutputSatisfiesBothConstraints) {
    int feasible = 0;
    for (int mode = 0; mode < 4; ++mode) {
        th::TheoryOptions opt;
        opt.empirical_alpha2 = mode & 1;
        opt.x_at_given_alpha = mode & 2;
        for (int m = 1; m <= 8; ++m) {
            for (double alpha : {th::alpha_upper(m), 0.5 * (1.0 / m + 1.0 / (m + 1))}) {
                try {
                    const auto p = th::solve_sizes(m, alpha, opt);
                    ++feasible;
                    ASSERT_EQ(p.m, m);
                    ASSERT_EQ(p.fractions.size(), static_cast<std::size_t>(m));
                    EXPECT_LT(p.residuals.sum, 1e-10);
                    if (m > 1) {
                        ASSERT_TRUE(p.residuals.sum_sq);
                        EXPECT_LT(*p.residuals.sum_sq, 1e-10);
                    }
                    EXPECT_LT(p.residuals.fixed_point, 1e-12);
                    double s = 0, q = 0;
                    for (std::size_t i = 0; i < p.fractions.size(); ++i) {
                        EXPECT_GT(p.fractions[i], 0.0);
                        if (i > 0) {
                            EXPECT_GE(p.fractions[i - 1], p.fractions[i]);
                        }
                        s += p.fractions[i];
                        q += p.fractions[i] * p.fractions[i];
                    }
                    EXPECT_NEAR(s, p.x_m, 1e-10);
                    if (m > 1) {
                        EXPECT_NEAR(q, p.alpha_m, 1e-10);
                    }
                } catch (const bfw::InfeasibleError& e) {
                    EXPECT_GE(e.level(), 3);
                    EXPECT_LE(e.level(), m);
                }
            }
        }
    }
    EXPECT_GE(feasible, 12);
}

TEST(SolveSizes, ChainBreaksAtThreeWithCleanAlphaTwo) {
    try {
        th::solve_sizes(4, 0.25);
        FAIL() << "expected infeasibility";
    } catch (const bfw::InfeasibleError& e) {
        EXPECT_EQ(e.level(), 3);
        EXPECT_LT(e.discriminant(), 0.0);
    }
    th::TheoryOptions opt;
    opt.empirical_alpha2 = true;
    const auto p3 = th::solve_sizes(3, 1.0 / 3, opt);
    EXPECT_EQ(p3.fractions.size(), 3u);
    try {
        th::solve_sizes(4, 0.25, opt);
        FAIL() << "expected infeasibility";
    } catch (const bfw::InfeasibleError& e) {
        EXPECT_EQ(e.level(), 4);
    }
}

TEST(SolveSizes, RejectsBadArguments) {
    EXPECT_THROW(th::solve_sizes(0, 0.5), bfw::ConfigError);
    EXPECT_THROW(th::solve_sizes(2, 0.0), bfw::ConfigError);
}

TEST(Predict, ReportsFeasibleAndInfeasible) {
    const auto two = th::predict(0.5);
    EXPECT_EQ(two.m, 2);
    EXPECT_TRUE(two.feasible());
    EXPECT_DOUBLE_EQ(two.alpha_m, 0.5);
    EXPECT_NEAR(two.x_m, 0.9802, 5e-5);

    const auto four = th::predict(0.25);
    EXPECT_EQ(four.m, 4);
    EXPECT_DOUBLE_EQ(four.alpha_m, 0.25);
    EXPECT_NEAR(four.x_m, 0.9997, 5e-5);
    EXPECT_FALSE(four.feasible());
    EXPECT_EQ(four.infeasible_level, 3);

    const auto one = th::predict(0.9, {}, 1);
    ASSERT_TRUE(one.feasible());
    EXPECT_DOUBLE_EQ(one.sizes->fractions[0], one.x_m);
}

}  // namespace
