#ifndef BFW_OBSERVABLES_HPP
#define BFW_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bfw/partition.hpp"

namespace bfw {

/// One sampled observation of a run.
struct TraceRecord {
    std::uint64_t u = 0;
    std::uint64_t t = 0;
    std::uint64_t k = 0;
    std::vector<double> top_sizes;  ///< largest component fractions, descending
    double p1 = 0.0;
    double p2 = 0.0;
    std::uint64_t component_count = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/**
 * Ordered node pairs (self-pairs included, n^2 in total) split by the case
 * a sampled edge would fall into: both ends in one component, two components
 * whose sizes sum to at most k, or two components summing to more than k.
 * `same + small + big == n^2` holds exactly.
 */
struct CaseCounts {
    std::uint64_t same = 0;
    std::uint64_t small = 0;
    std::uint64_t big = 0;
};

inline CaseCounts case_counts(const SizeIndex& index, std::uint64_t k) {
    const std::uint64_t n = index.total_size();
    CaseCounts out;
    out.same = index.total_sum_sq();
    for (const auto& e : index.entries()) {
        if (e.size > k) break;
        const PrefixSums partners = index.prefix(k - e.size);
        std::uint64_t pairs = e.count * e.size * partners.sum;
        if (2 * e.size <= k) pairs -= e.count * e.size * e.size;  // a component is not its own partner
        out.small += pairs;
    }
    out.big = n * n - out.same - out.small;
    return out;
}

/// Sum of squared component fractions over all components.
inline double p1(const SizeIndex& index) {
    const double n = static_cast<double>(index.total_size());
    return static_cast<double>(index.total_sum_sq()) / (n * n);
}

template <class Index>
double p1(const ComponentPartition<Index>& partition) {
    const double n = static_cast<double>(partition.node_count());
    return static_cast<double>(partition.sum_sq_sizes()) / (n * n);
}

/// P1 truncated to the `count` largest components, as plotted in the figures.
inline double p1_top(const SizeIndex& index, std::size_t count = 100) {
    const double n = static_cast<double>(index.total_size());
    double acc = 0.0;
    for (std::uint64_t s : index.top(count)) {
        const double c = static_cast<double>(s) / n;
        acc += c * c;
    }
    return acc;
}

/// Probability that a sampled edge joins two distinct components with size sum <= k.
inline double p2(const SizeIndex& index, std::uint64_t k) {
    const double n = static_cast<double>(index.total_size());
    return static_cast<double>(case_counts(index, k).small) / (n * n);
}

template <class Index>
double p2(const ComponentPartition<Index>& partition, std::uint64_t k) {
    return p2(partition.size_index(), k);
}

/// P2 == 0 exactly, decided from the two smallest sizes.
inline bool p2_is_zero(const SizeIndex& index, std::uint64_t k) {
    if (index.component_count() < 2) return true;
    auto [a, b] = index.two_smallest();
    return a + b > k;
}

/// Fractions of components with k/2 < size < k, descending.
inline std::vector<double> giant_set(const SizeIndex& index, std::uint64_t k) {
    const double n = static_cast<double>(index.total_size());
    std::vector<double> out;
    for (auto it = index.entries().rbegin(); it != index.entries().rend(); ++it) {
        if (2 * it->size <= k) break;
        if (it->size >= k) continue;
        out.insert(out.end(), it->count, static_cast<double>(it->size) / n);
    }
    return out;
}

template <class Index>
TraceRecord observe(const ComponentPartition<Index>& partition, std::uint64_t u, std::uint64_t t,
                    std::uint64_t k, std::size_t top_k) {
    const SizeIndex& index = partition.size_index();
    const double n = static_cast<double>(partition.node_count());
    TraceRecord rec;
    rec.u = u;
    rec.t = t;
    rec.k = k;
    for (std::uint64_t s : index.top(top_k)) rec.top_sizes.push_back(static_cast<double>(s) / n);
    rec.p1 = p1(partition);
    rec.p2 = p2(index, k);
    rec.component_count = partition.component_count();
    return rec;
}

// ---------------------------------------------------------------------------
// Trace analysis

/// Default fraction above which a component counts as giant.
inline constexpr double kGiantThreshold = 0.01;

/// Largest fractions of a record, as node counts.
inline std::vector<std::uint64_t> top_counts(const TraceRecord& r, std::uint64_t n) {
    std::vector<std::uint64_t> out;
    out.reserve(r.top_sizes.size());
    for (double c : r.top_sizes) out.push_back(static_cast<std::uint64_t>(std::llround(c * static_cast<double>(n))));
    return out;
}

/// Fractions above `threshold` in a record, descending.
inline std::vector<double> giant_fractions(const TraceRecord& r, double threshold = kGiantThreshold) {
    std::vector<double> out;
    for (double c : r.top_sizes) {
        if (c <= threshold) break;
        out.push_back(c);
    }
    return out;
}

/**
 * No two giant components of the record can merge without raising k: the
 * two smallest giants sum to more than k. False when the record's top list
 * is too short to see every giant.
 */
inline bool giants_blocked(const TraceRecord& r, std::uint64_t n, double threshold = kGiantThreshold) {
    const std::vector<double> giants = giant_fractions(r, threshold);
    const bool all_visible = r.top_sizes.size() >= r.component_count || giants.size() < r.top_sizes.size();
    if (!all_visible) return false;
    if (giants.size() < 2) return true;
    const double nd = static_cast<double>(n);
    const auto a = static_cast<std::uint64_t>(std::llround(giants[giants.size() - 1] * nd));
    const auto b = static_cast<std::uint64_t>(std::llround(giants[giants.size() - 2] * nd));
    return a + b > r.k;
}

struct SteadyStateReport {
    int m = 0;
    std::vector<double> fractions;  ///< giant fractions, descending
    double p1_final = 0.0;
    double p2_final = 0.0;  ///< full P2 of the last record, dust pairs included
    double x = 0.0;         ///< sum of giant fractions
    std::uint64_t detected_at_u = 0;
    std::uint64_t stable_window = 0;  ///< sampled edges from detection to end of trace
    std::size_t detected_index = 0;   ///< trace index of the detection record

    [[nodiscard]] double sum_sq() const {
        double acc = 0.0;
        for (double c : fractions) acc += c * c;
        return acc;
    }
};

/// P1 > alpha and no giant pair mergeable under k.
inline bool steady_condition(const TraceRecord& r, std::uint64_t n, double alpha,
                             double threshold = kGiantThreshold) {
    return r.p1 > alpha && giants_blocked(r, n, threshold);
}

/**
 * Finds the first record from which the steady condition holds on every
 * later record, provided that suffix spans at least `window` sampled edges.
 *
 * P2 = 0 is judged on giant components only: finitely many small
 * components survive to t = 2n and keep the full P2 positive, while no
 * merge among the giants remains possible. Fractions and P1/P2 are read
 * off the last record.
 */
inline std::optional<SteadyStateReport> detect_steady_state(std::span<const TraceRecord> trace, std::uint64_t n,
                                                            double alpha, std::uint64_t window,
                                                            double threshold = kGiantThreshold) {
    if (window < 1) throw ConfigError("steady-state window must be >= 1");
    std::size_t first = trace.size();
    while (first > 0 && steady_condition(trace[first - 1], n, alpha, threshold)) --first;
    if (first == trace.size()) return std::nullopt;

    const TraceRecord& last = trace.back();
    const std::uint64_t span = last.u - trace[first].u;
    if (span < window) return std::nullopt;

    SteadyStateReport rep;
    rep.fractions = giant_fractions(last, threshold);
    for (double c : rep.fractions) rep.x += c;
    rep.m = static_cast<int>(rep.fractions.size());
    rep.p1_final = last.p1;
    rep.p2_final = last.p2;
    rep.detected_at_u = trace[first].u;
    rep.stable_window = span;
    rep.detected_index = first;
    return rep;
}

/// How one merge relates to a set of candidate components present before it.
struct MergeCheck {
    std::vector<double> before_sizes;  ///< two smallest candidates before the jump (empty if fewer than two)
    bool two_minimum_merge = false;    ///< the new maximum equals their sum within 1/n
    bool others_unchanged = false;     ///< every other candidate is still present afterwards
};

struct JumpEvent {
    std::uint64_t u_at_jump = 0;  ///< u of the record right after the jump
    std::size_t index = 0;        ///< trace index of that record
    double after_size = 0.0;      ///< largest fraction after the jump
    double delta_cmax = 0.0;
    std::uint64_t k_before = 0;
    MergeCheck set_s;   ///< candidates: S = {k/2 < size < k} at the record before the jump
    MergeCheck giants;  ///< candidates: all components above the giant threshold
};

/// Members of S (k/2 < size < k) among a record's top fractions, descending.
inline std::vector<double> giant_set(const TraceRecord& r, std::uint64_t n) {
    std::vector<double> out;
    const auto counts = top_counts(r, n);
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (2 * counts[i] > r.k && counts[i] < r.k) out.push_back(r.top_sizes[i]);
    return out;
}

namespace detail {

inline MergeCheck check_merge(const std::vector<double>& candidates, const TraceRecord& after, std::uint64_t n) {
    MergeCheck out;
    if (candidates.size() < 2) return out;
    const double tol = 1.0 / static_cast<double>(n);
    const double b = candidates[candidates.size() - 1];
    const double a = candidates[candidates.size() - 2];
    out.before_sizes = {a, b};
    out.two_minimum_merge = std::abs(after.top_sizes.front() - (a + b)) <= tol;

    std::vector<double> remaining(after.top_sizes.begin() + 1, after.top_sizes.end());
    out.others_unchanged = true;
    for (std::size_t i = 0; i + 2 < candidates.size(); ++i) {
        auto it = std::find_if(remaining.begin(), remaining.end(),
                               [&](double c) { return std::abs(c - candidates[i]) <= 0.5 * tol; });
        if (it == remaining.end()) {
            out.others_unchanged = false;
            break;
        }
        remaining.erase(it);
    }
    return out;
}

}  // namespace detail

/**
 * Locates the sample step with the largest increase of the largest
 * component fraction and checks it against the two-minimum merge picture,
 * once with S as candidates and once with all giants. Resolution is that
 * of the trace: record every merge to see single merges. Returns nothing if
 * the largest fraction never grows by at least `min_delta` in one step.
 */
inline std::optional<JumpEvent> detect_jump(std::span<const TraceRecord> trace, std::uint64_t n,
                                            double min_delta = 0.05, double threshold = kGiantThreshold) {
    std::size_t best = 0;
    double best_delta = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i) {
        if (trace[i].top_sizes.empty() || trace[i - 1].top_sizes.empty()) continue;
        const double d = trace[i].top_sizes.front() - trace[i - 1].top_sizes.front();
        if (d > best_delta) {
            best_delta = d;
            best = i;
        }
    }
    if (best == 0 || best_delta < min_delta) return std::nullopt;

    const TraceRecord& before = trace[best - 1];
    const TraceRecord& after = trace[best];
    JumpEvent ev;
    ev.u_at_jump = after.u;
    ev.index = best;
    ev.after_size = after.top_sizes.front();
    ev.delta_cmax = best_delta;
    ev.k_before = before.k;
    ev.set_s = detail::check_merge(giant_set(before, n), after, n);
    ev.giants = detail::check_merge(giant_fractions(before, threshold), after, n);
    return ev;
}

}  // namespace bfw

#endif  // BFW_OBSERVABLES_HPP
