#ifndef BFW_THEORY_HPP
#define BFW_THEORY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "bfw/error.hpp"

namespace bfw::theory {

/// Measured upper bound of the two-giant interval, used instead of 1/2 on request.
inline constexpr double kEmpiricalAlpha2 = 0.52;

/// Number of giants m with alpha in (1/(m+1), 1/m].
inline int predict_m(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(alpha));
    const double q = 1.0 / alpha;
    double m = std::floor(q);
    // 1/(1/m) may land a rounding error below m; the interval is right-closed.
    if ((m + 1.0) - q <= 1e-12 * q) m += 1.0;
    return static_cast<int>(m);
}

/// Upper end of the m-giant interval: 1/m, or 0.52 for m = 2 when `empirical`.
inline double alpha_upper(int m, bool empirical = false) {
    if (m < 1) throw ConfigError("m must be >= 1, got " + std::to_string(m));
    if (empirical && m == 2) return kEmpiricalAlpha2;
    return 1.0 / m;
}

/// h(x) = 1 - x - exp(-2x/alpha); its root in (0,1) is the total giant fraction.
inline double giant_fraction_residual(double x, double alpha) { return 1.0 - x - std::exp(-2.0 * x / alpha); }

/**
 * Root of 1 - x = exp(-2x/alpha) in (0, 1].
 *
 * Bisection on a bracket that excludes the trivial root x = 0, then Newton
 * steps that are only kept while they stay inside the bracket and shrink
 * the residual. For tiny alpha the root rounds to 1 in double precision.
 */
inline double solve_giant_fraction(double alpha, double tol = 1e-12) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(alpha));
    if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");

    auto h = [alpha](double x) { return giant_fraction_residual(x, alpha); };
    double lo = std::min(1e-6, alpha / 8.0);
    double hi = 1.0;
    if (!(h(lo) > 0.0)) throw ConfigError("no sign change for alpha " + std::to_string(alpha));
    if (h(hi) >= 0.0) return hi;

    for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) > 0.0 ? lo : hi) = mid;
    }

    double x = 0.5 * (lo + hi);
    for (int i = 0; i < 50 && std::abs(h(x)) >= tol; ++i) {
        const double slope = -1.0 + (2.0 / alpha) * std::exp(-2.0 * x / alpha);
        const double next = x - h(x) / slope;
        if (!(next > lo && next < hi) || std::abs(h(next)) >= std::abs(h(x))) {
            // Newton misbehaved: fall back to one bisection step.
            const double mid = 0.5 * (lo + hi);
            (h(mid) > 0.0 ? lo : hi) = mid;
            x = mid;
            if (hi - lo <= std::numeric_limits<double>::epsilon()) break;
            continue;
        }
        x = next;
        (h(x) > 0.0 ? lo : hi) = x;
    }
    // Polish past the tolerance: near x = 1 a residual of tol still leaves x off by ~tol.
    for (int i = 0; i < 8; ++i) {
        const double slope = -1.0 + (2.0 / alpha) * std::exp(-2.0 * x / alpha);
        const double next = x - h(x) / slope;
        if (!(next > 0.0 && next <= 1.0) || std::abs(h(next)) > std::abs(h(x)) || next == x) break;
        x = next;
    }
    return x;
}

/// Two numbers a >= b with a + b = sum and a^2 + b^2 = sum_sq.
struct PairSolution {
    double larger = 0.0;
    double smaller = 0.0;
    double discriminant = 0.0;  ///< 2 sum_sq - sum^2; negative means no real pair
};

inline PairSolution solve_pair(double sum, double sum_sq) {
    PairSolution out;
    out.discriminant = 2.0 * sum_sq - sum * sum;
    if (out.discriminant < 0.0) return out;
    const double root = std::sqrt(out.discriminant);
    out.larger = 0.5 * (sum + root);
    out.smaller = 0.5 * (sum - root);
    return out;
}

struct Residuals {
    double sum = 0.0;          ///< |sum of fractions - x_m|
    std::optional<double> sum_sq;  ///< |sum of squared fractions - alpha_m|; not imposed for m = 1
    double fixed_point = 0.0;  ///< |1 - x_m - exp(-2 x_m / alpha_x)|
};

struct TheoryPrediction {
    int m = 0;
    double alpha_m = 0.0;
    double x_m = 0.0;
    double alpha_x = 0.0;          ///< alpha at which x_m was evaluated
    std::vector<double> fractions;  ///< descending
    Residuals residuals;
};

struct TheoryOptions {
    bool empirical_alpha2 = false;
    /// Evaluate every level's x at the supplied alpha instead of its interval upper bound.
    bool x_at_given_alpha = false;
    double tol = 1e-12;
};

namespace detail {

inline Residuals residuals_of(const std::vector<double>& c, double x, double alpha_m, double alpha_x) {
    const double s = std::accumulate(c.begin(), c.end(), 0.0);
    const double q = std::inner_product(c.begin(), c.end(), c.begin(), 0.0);
    Residuals r;
    r.sum = std::abs(s - x);
    if (c.size() > 1) r.sum_sq = std::abs(q - alpha_m);
    r.fixed_point = std::abs(giant_fraction_residual(x, alpha_x));
    return r;
}

}  // namespace detail

/**
 * Steady-state giant fractions for m_target giants.
 *
 * Level 1 is the whole giant fraction (its sum-of-squares equation is not
 * imposed: one unknown cannot meet both constraints); level 2 solves the sum / sum of
 * squares pair directly. Each higher level inherits all but the largest
 * fraction of the level below (the largest is the product of the previous
 * collapse) and solves the pair equations for the two remaining ones.
 * Throws InfeasibleError naming the first level whose pair has no real,
 * positive solution.
 */
inline TheoryPrediction solve_sizes(int m_target, double alpha, const TheoryOptions& opt = {}) {
    if (m_target < 1) throw ConfigError("m must be >= 1, got " + std::to_string(m_target));
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(alpha));

    auto x_alpha = [&](int level) { return opt.x_at_given_alpha ? alpha : alpha_upper(level, opt.empirical_alpha2); };

    TheoryPrediction p;
    std::vector<double> c;
    for (int level = 1; level <= m_target; ++level) {
        const double a_m = alpha_upper(level, opt.empirical_alpha2);
        const double ax = x_alpha(level);
        const double x = solve_giant_fraction(ax, opt.tol);
        if (level == 1) {
            c = {x};
        } else {
            std::vector<double> known(c.begin() + 1, c.end());
            const double s = x - std::accumulate(known.begin(), known.end(), 0.0);
            const double q = a_m - std::inner_product(known.begin(), known.end(), known.begin(), 0.0);
            const PairSolution pair = solve_pair(s, q);
            if (pair.discriminant < 0.0) throw InfeasibleError(level, pair.discriminant);
            if (!(pair.smaller > 0.0)) throw InfeasibleError(level, pair.discriminant);
            known.push_back(pair.larger);
            known.push_back(pair.smaller);
            std::sort(known.begin(), known.end(), std::greater<>());
            c = std::move(known);
        }
        p.m = level;
        p.alpha_m = a_m;
        p.x_m = x;
        p.alpha_x = ax;
    }
    p.fractions = c;
    p.residuals = detail::residuals_of(c, p.x_m, p.alpha_m, p.alpha_x);
    return p;
}

/// Everything the theory says about one alpha, including a failed size recursion.
struct TheoryReport {
    double alpha = 0.0;
    int m = 0;
    double alpha_m = 0.0;
    double x_m = 0.0;
    double alpha_x = 0.0;
    std::optional<TheoryPrediction> sizes;  ///< absent when the recursion is infeasible
    int infeasible_level = 0;               ///< first failing level, 0 when feasible
    double discriminant = 0.0;              ///< discriminant at that level

    [[nodiscard]] bool feasible() const noexcept { return sizes.has_value(); }
};

/// Theory for `alpha` with m = predict_m(alpha) unless `m_override` is given.
inline TheoryReport predict(double alpha, const TheoryOptions& opt = {}, std::optional<int> m_override = {}) {
    TheoryReport r;
    r.alpha = alpha;
    r.m = m_override ? *m_override : predict_m(alpha);
    if (r.m < 1) throw ConfigError("m must be >= 1, got " + std::to_string(r.m));
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(alpha));
    r.alpha_m = alpha_upper(r.m, opt.empirical_alpha2);
    r.alpha_x = opt.x_at_given_alpha ? alpha : r.alpha_m;
    r.x_m = solve_giant_fraction(r.alpha_x, opt.tol);
    try {
        r.sizes = solve_sizes(r.m, alpha, opt);
    } catch (const InfeasibleError& e) {
        r.infeasible_level = e.level();
        r.discriminant = e.discriminant();
    }
    return r;
}

}  // namespace bfw::theory

#endif  // BFW_THEORY_HPP
