#ifndef BFW_ENSEMBLE_HPP
#define BFW_ENSEMBLE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bfw/engine.hpp"
#include "bfw/error.hpp"
#include "bfw/observables.hpp"
#include "bfw/theory.hpp"

namespace bfw {

// ---------------------------------------------------------------------------
// Seeds

/// The splitmix64 output function (Steele, Lea, Flood 2014).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Seed of instance `instance_index` at grid point `alpha_index`:
 *   mix64(mix64(base ^ mix64(alpha_index + G)) + G * (instance_index + 1)),
 * G = 0x9E3779B97F4A7C15. Part of the output format; do not change.
 */
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t alpha_index,
                                    std::uint64_t instance_index) noexcept {
    constexpr std::uint64_t G = 0x9E3779B97F4A7C15ULL;
    const std::uint64_t row = mix64(base_seed ^ mix64(alpha_index + G));
    return mix64(row + G * (instance_index + 1));
}

// ---------------------------------------------------------------------------
// Parallel execution

/// Calls fn(i) for i in [0, count) on up to `threads` workers (0 = hardware concurrency).
/// The first exception thrown by any call is rethrown after all workers stop.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
            }
        }
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Ensemble

struct EnsembleConfig {
    std::vector<double> alphas;
    std::uint64_t node_count = 100000;
    std::uint64_t instances = 20;
    std::uint64_t base_seed = 0;
    std::uint64_t sample_every = 1000;
    std::uint64_t window = 0;  ///< steady-state window in sampled edges; 0 selects n/10
    std::size_t top_k = 10;
    double giant_threshold = kGiantThreshold;
    unsigned threads = 0;  ///< 0 = hardware concurrency

    [[nodiscard]] std::uint64_t steady_window() const noexcept {
        return window == 0 ? std::max<std::uint64_t>(1, node_count / 10) : window;
    }

    [[nodiscard]] EngineConfig engine_config(std::size_t alpha_index, std::uint64_t instance_index) const {
        EngineConfig c;
        c.alpha = alphas.at(alpha_index);
        c.node_count = node_count;
        c.seed = derive_seed(base_seed, alpha_index, instance_index);
        c.sample_every = sample_every;
        c.top_k = top_k;
        return c;
    }

    void validate() const {
        if (alphas.empty()) throw ConfigError("at least one alpha is required");
        for (double a : alphas)
            if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(a));
        if (instances < 1) throw ConfigError("instances must be >= 1");
        if (!(giant_threshold > 0.0 && giant_threshold < 1.0)) throw ConfigError("giant threshold must lie in (0,1)");
        engine_config(0, 0).validate();
    }
};

/// What one instance contributed to the ensemble.
struct InstanceResult {
    std::size_t alpha_index = 0;
    std::uint64_t instance_index = 0;
    std::uint64_t seed = 0;
    std::optional<SteadyStateReport> steady;
    std::vector<double> final_giants;  ///< fractions above the giant threshold at t = 2n
    double final_p1 = 0.0;
    std::uint64_t final_k = 0;
    std::uint64_t final_t = 0;
    std::uint64_t final_u = 0;
    std::string error;  ///< non-empty when the instance failed

    [[nodiscard]] bool failed() const noexcept { return !error.empty(); }
};

/// Condenses a finished run into an InstanceResult.
inline InstanceResult analyse_run(const RunResult& run, std::uint64_t window, double giant_threshold = kGiantThreshold) {
    InstanceResult r;
    r.seed = run.config.seed;
    r.steady = detect_steady_state(run.trace, run.config.node_count, run.config.alpha, window, giant_threshold);
    const TraceRecord& last = run.trace.back();
    r.final_giants = giant_fractions(last, giant_threshold);
    r.final_p1 = last.p1;
    r.final_k = last.k;
    r.final_t = last.t;
    r.final_u = last.u;
    return r;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation; 0 for a single value

    /// Standard error of the mean.
    [[nodiscard]] double sem(std::uint64_t count) const {
        return count == 0 ? 0.0 : std / std::sqrt(static_cast<double>(count));
    }
};

inline MeanStd mean_std(const std::vector<double>& v) {
    MeanStd out;
    if (v.empty()) return out;
    double s = 0.0;
    for (double x : v) s += x;
    out.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double q = 0.0;
        for (double x : v) q += (x - out.mean) * (x - out.mean);
        out.std = std::sqrt(q / static_cast<double>(v.size() - 1));
    }
    return out;
}

/// Most frequent key; ties go to the smaller key.
inline std::optional<int> modal(const std::map<int, std::uint64_t>& hist) {
    std::optional<int> best;
    std::uint64_t best_count = 0;
    for (const auto& [m, c] : hist)
        if (c > best_count) {
            best = m;
            best_count = c;
        }
    return best;
}

/**
 * Per-alpha reduction. Fractions, sum of squares and x are averaged over the
 * instances that reached a steady state with the modal m; steady states
 * with another m, undetected instances and failures are only counted.
 */
struct AlphaSummary {
    double alpha = 0.0;
    std::uint64_t instances = 0;
    std::vector<std::uint64_t> seeds;              ///< by instance index
    std::map<int, std::uint64_t> m_histogram;      ///< steady-state m
    std::uint64_t absent = 0;                      ///< no steady state by t = 2n
    std::uint64_t failed = 0;                      ///< instance raised an error
    std::map<int, std::uint64_t> final_m_histogram;  ///< giant count at t = 2n (failures excluded)
    std::optional<int> modal_m;
    std::optional<int> modal_final_m;
    std::uint64_t aggregated = 0;  ///< instances behind the statistics below
    std::vector<MeanStd> fractions;
    MeanStd sum_sq;
    MeanStd x;
};

/// Reduces the instances of one alpha. Input order does not matter.
inline AlphaSummary summarise(double alpha, std::vector<InstanceResult> results) {
    std::sort(results.begin(), results.end(),
              [](const InstanceResult& a, const InstanceResult& b) { return a.instance_index < b.instance_index; });

    AlphaSummary s;
    s.alpha = alpha;
    s.instances = results.size();
    for (const auto& r : results) {
        s.seeds.push_back(r.seed);
        if (r.failed()) {
            ++s.failed;
            continue;
        }
        ++s.final_m_histogram[static_cast<int>(r.final_giants.size())];
        if (r.steady)
            ++s.m_histogram[r.steady->m];
        else
            ++s.absent;
    }
    s.modal_m = modal(s.m_histogram);
    s.modal_final_m = modal(s.final_m_histogram);
    if (!s.modal_m) return s;

    const auto m = static_cast<std::size_t>(*s.modal_m);
    std::vector<std::vector<double>> by_rank(m);
    std::vector<double> sq, xs;
    for (const auto& r : results) {
        if (r.failed() || !r.steady || r.steady->m != *s.modal_m) continue;
        for (std::size_t i = 0; i < m; ++i) by_rank[i].push_back(r.steady->fractions[i]);
        sq.push_back(r.steady->sum_sq());
        xs.push_back(r.steady->x);
    }
    s.aggregated = sq.size();
    for (const auto& v : by_rank) s.fractions.push_back(mean_std(v));
    s.sum_sq = mean_std(sq);
    s.x = mean_std(xs);
    return s;
}

struct EnsembleSummary {
    EnsembleConfig config;
    std::vector<AlphaSummary> per_alpha;
};

/// Runs one instance; errors are captured into the result.
inline InstanceResult run_instance(const EnsembleConfig& config, std::size_t alpha_index,
                                   std::uint64_t instance_index) {
    InstanceResult r;
    try {
        r = analyse_run(run(config.engine_config(alpha_index, instance_index)), config.steady_window(),
                        config.giant_threshold);
    } catch (const std::exception& e) {
        r.error = e.what();
        if (r.error.empty()) r.error = "unknown error";
        r.seed = derive_seed(config.base_seed, alpha_index, instance_index);
    }
    r.alpha_index = alpha_index;
    r.instance_index = instance_index;
    return r;
}

/// All instances of every alpha, as completed by a worker pool.
inline std::vector<InstanceResult> run_instances(const EnsembleConfig& config) {
    config.validate();
    const std::size_t total = config.alphas.size() * config.instances;
    std::vector<InstanceResult> results(total);
    parallel_for(total, config.threads, [&](std::size_t task) {
        results[task] = run_instance(config, task / config.instances, task % config.instances);
    });
    return results;
}

inline EnsembleSummary summarise(const EnsembleConfig& config, const std::vector<InstanceResult>& results) {
    EnsembleSummary out{config, {}};
    std::vector<std::vector<InstanceResult>> grouped(config.alphas.size());
    for (const auto& r : results) grouped.at(r.alpha_index).push_back(r);
    for (std::size_t a = 0; a < config.alphas.size(); ++a)
        out.per_alpha.push_back(summarise(config.alphas[a], std::move(grouped[a])));
    return out;
}

inline EnsembleSummary run_ensemble(const EnsembleConfig& config) { return summarise(config, run_instances(config)); }

// ---------------------------------------------------------------------------
// Staircase

struct StaircasePoint {
    double alpha = 0.0;
    int predicted_m = 0;
    std::optional<int> modal_m;  ///< modal giant count at t = 2n
    std::uint64_t instances = 0;
    std::uint64_t matching = 0;  ///< instances whose giant count equals predicted_m
    std::map<int, std::uint64_t> histogram;

    [[nodiscard]] double match_fraction() const {
        return instances == 0 ? 0.0 : static_cast<double>(matching) / static_cast<double>(instances);
    }
};

/**
 * Modal m per alpha. m is the number of giants at t = 2n rather than the
 * steady-state m: near alpha = 1 the run ends before P1 exceeds alpha,
 * although the giant count has long settled.
 */
inline std::vector<StaircasePoint> staircase(const EnsembleSummary& summary) {
    std::vector<StaircasePoint> out;
    for (const auto& s : summary.per_alpha) {
        StaircasePoint p;
        p.alpha = s.alpha;
        p.predicted_m = theory::predict_m(s.alpha);
        p.modal_m = s.modal_final_m;
        p.instances = s.instances;
        p.histogram = s.final_m_histogram;
        if (auto it = p.histogram.find(p.predicted_m); it != p.histogram.end()) p.matching = it->second;
        out.push_back(std::move(p));
    }
    return out;
}

inline std::vector<StaircasePoint> staircase_scan(const std::vector<double>& alpha_grid, std::uint64_t n,
                                                  std::uint64_t instances, std::uint64_t base_seed,
                                                  unsigned threads = 0) {
    if (alpha_grid.empty()) throw ConfigError("staircase grid must not be empty");
    EnsembleConfig c;
    c.alphas = alpha_grid;
    c.node_count = n;
    c.instances = instances;
    c.base_seed = base_seed;
    c.threads = threads;
    return staircase(run_ensemble(c));
}

// ---------------------------------------------------------------------------
// Comparison

/// One side of a comparison: either an ensemble mean or a theory prediction.
struct ComparisonPoint {
    double alpha = 0.0;
    std::optional<int> m;
    double sum_sq = 0.0;
    double x = 0.0;
    std::vector<double> fractions;  ///< descending; empty when unknown
};

inline ComparisonPoint to_point(const AlphaSummary& s) {
    ComparisonPoint p;
    p.alpha = s.alpha;
    p.m = s.modal_m;
    p.sum_sq = s.sum_sq.mean;
    p.x = s.x.mean;
    for (const auto& f : s.fractions) p.fractions.push_back(f.mean);
    return p;
}

/// Theory side: sum of squares is alpha_m, x is x_m, fractions when the recursion was feasible.
inline ComparisonPoint to_point(const theory::TheoryReport& r) {
    ComparisonPoint p;
    p.alpha = r.alpha;
    p.m = r.m;
    p.sum_sq = r.alpha_m;
    p.x = r.x_m;
    if (r.sizes) p.fractions = r.sizes->fractions;
    return p;
}

struct ErrorPair {
    double simulated = 0.0;
    double theory = 0.0;
    double abs_error = 0.0;
    double rel_error = 0.0;  ///< relative to the theory value

    static ErrorPair of(double sim, double th) {
        ErrorPair e{sim, th, std::abs(sim - th), 0.0};
        e.rel_error = th != 0.0 ? e.abs_error / std::abs(th) : (e.abs_error == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        return e;
    }
};

struct ComparisonRow {
    double alpha = 0.0;
    std::optional<int> m_simulated;
    std::optional<int> m_theory;
    ErrorPair sum_sq;
    ErrorPair x;
    std::vector<ErrorPair> fractions;  ///< ranks present on both sides
};

/// Pairs points by alpha (to 1e-9); both lists must cover the same alphas.
inline std::vector<ComparisonRow> compare_with_theory(const std::vector<ComparisonPoint>& simulated,
                                                      const std::vector<ComparisonPoint>& predicted) {
    if (simulated.size() != predicted.size())
        throw ConfigError("alpha sets differ: " + std::to_string(simulated.size()) + " vs " +
                          std::to_string(predicted.size()) + " entries");
    std::vector<ComparisonRow> rows;
    for (const auto& s : simulated) {
        auto it = std::find_if(predicted.begin(), predicted.end(),
                               [&](const ComparisonPoint& p) { return std::abs(p.alpha - s.alpha) <= 1e-9; });
        if (it == predicted.end()) throw ConfigError("no theory entry for alpha " + std::to_string(s.alpha));
        ComparisonRow row;
        row.alpha = s.alpha;
        row.m_simulated = s.m;
        row.m_theory = it->m;
        row.sum_sq = ErrorPair::of(s.sum_sq, it->sum_sq);
        row.x = ErrorPair::of(s.x, it->x);
        const std::size_t ranks = std::min(s.fractions.size(), it->fractions.size());
        for (std::size_t i = 0; i < ranks; ++i) row.fractions.push_back(ErrorPair::of(s.fractions[i], it->fractions[i]));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<ComparisonRow> compare_with_theory(const EnsembleSummary& summary,
                                                      const std::vector<theory::TheoryReport>& predictions) {
    std::vector<ComparisonPoint> sim, th;
    for (const auto& s : summary.per_alpha) sim.push_back(to_point(s));
    for (const auto& p : predictions) th.push_back(to_point(p));
    return compare_with_theory(sim, th);
}

}  // namespace bfw

#endif  // BFW_ENSEMBLE_HPP
