#ifndef BFW_ENGINE_HPP
#define BFW_ENGINE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bfw/error.hpp"
#include "bfw/observables.hpp"
#include "bfw/partition.hpp"

namespace bfw {

/// Recorded in every output header; traces replay bit-exactly only under the same generator.
inline constexpr std::string_view kGeneratorIdentity = "std::mt19937_64+lemire-bounded";

using Rng = std::mt19937_64;
using Node = std::uint32_t;

struct Edge {
    Node a = 0;
    Node b = 0;
    friend bool operator==(const Edge&, const Edge&) = default;
};

namespace detail {
__extension__ typedef unsigned __int128 u128;
}  // namespace detail

/// Uniform integer in [0, range) by Lemire's multiply-shift rejection.
inline std::uint64_t bounded_draw(Rng& rng, std::uint64_t range) {
    detail::u128 m = static_cast<detail::u128>(rng()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            m = static_cast<detail::u128>(rng()) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

/// Uniform edge of the complete graph on n nodes (distinct endpoints).
inline Edge sample_edge(Rng& rng, std::uint64_t n) {
    const auto a = bounded_draw(rng, n);
    auto b = bounded_draw(rng, n - 1);
    if (b >= a) ++b;
    return {static_cast<Node>(a), static_cast<Node>(b)};
}

// ---------------------------------------------------------------------------
// Acceptance threshold arithmetic
//
// t/u is compared with a double threshold g exactly: fma gives g*u as the
// unevaluated sum p + e, and t - p is exact whenever the comparison is
// close (Sterbenz). g(k) = alpha + 1/sqrt(2k) itself is evaluated in IEEE
// double, so the only rounding left is that of g. Equality counts as
// "t/u < g(k) is false", matching the strict comparison of the algorithm.

inline double accepted_fraction(std::uint64_t t, std::uint64_t u) {
    return static_cast<double>(t) / static_cast<double>(u);
}

/// Sign of t/u - g, exact for t, u < 2^53 and g >= 0.
inline int compare_fraction(std::uint64_t t, std::uint64_t u, double g) {
    const auto td = static_cast<double>(t);
    const auto ud = static_cast<double>(u);
    const double p = g * ud;
    const double e = std::fma(g, ud, -p);  // g*u == p + e exactly
    if (2.0 * td < p) return -1;
    if (td > 2.0 * p) return 1;
    const double d = td - p;  // exact: p/2 <= t <= 2p
    return d < e ? -1 : (d > e ? 1 : 0);
}

inline double stage_threshold(std::uint64_t k, double alpha) {
    return alpha + 1.0 / std::sqrt(2.0 * static_cast<double>(k));
}

/// True when t/u >= alpha + 1/sqrt(2k), i.e. stage k may not grow further.
inline bool stage_growth_blocked(std::uint64_t t, std::uint64_t u, std::uint64_t k, double alpha) {
    return compare_fraction(t, u, stage_threshold(k, alpha)) >= 0;
}

/// Number of stage increments available before growth is blocked; possibly unbounded.
struct IncrementCap {
    /// Finite caps at or above this value are reported as this value.
    static constexpr std::uint64_t kSaturated = std::uint64_t{1} << 62;

    bool unbounded = false;
    std::uint64_t value = 0;

    static constexpr IncrementCap infinite() { return {true, 0}; }
    static constexpr IncrementCap finite(std::uint64_t v) { return {false, v}; }

    /// Whether at least `needed` increments are available.
    [[nodiscard]] constexpr bool covers(std::uint64_t needed) const noexcept { return unbounded || value >= needed; }

    friend bool operator==(const IncrementCap&, const IncrementCap&) = default;
};

/**
 * Smallest x >= 0 with t/u >= alpha + 1/sqrt(2(k+x)), or unbounded when
 * t/u <= alpha. Uses the closed form ceil(1/(2 r^2)) - k with r = t/u - alpha
 * and then steps x against the defining inequality until it is exact.
 */
inline IncrementCap cap_increments(std::uint64_t t, std::uint64_t u, std::uint64_t k, double alpha) {
    if (u < 1 || t > u || k < 2 || u >= (std::uint64_t{1} << 53))
        throw ContractError("cap_increments: need u >= 1, t <= u, k >= 2 (t=" + std::to_string(t) +
                            " u=" + std::to_string(u) + " k=" + std::to_string(k) + ")");
    if (compare_fraction(t, u, alpha) <= 0) return IncrementCap::infinite();

    // Starting point only; the loops below settle x against the exact test.
    const double r = accepted_fraction(t, u) - alpha;
    const double target = std::ceil(1.0 / (2.0 * r * r));
    if (!(target < static_cast<double>(IncrementCap::kSaturated)))
        return IncrementCap::finite(IncrementCap::kSaturated);

    const auto stage = static_cast<std::uint64_t>(target);
    std::uint64_t x = stage > k ? stage - k : 0;
    while (x > 0 && stage_growth_blocked(t, u, k + x - 1, alpha)) --x;
    while (!stage_growth_blocked(t, u, k + x, alpha)) {
        if (++x >= IncrementCap::kSaturated) break;
    }
    return IncrementCap::finite(x);
}

// ---------------------------------------------------------------------------
// Engine

struct EngineConfig {
    double alpha = 0.5;
    std::uint64_t node_count = 100000;
    std::uint64_t seed = 0;
    std::uint64_t max_accepted = 0;  ///< 0 selects the default 2n
    std::uint64_t sample_every = 1000;
    std::size_t top_k = 10;
    bool record_merges = false;  ///< also record after every accepted merge

    [[nodiscard]] std::uint64_t accepted_limit() const noexcept {
        return max_accepted == 0 ? 2 * node_count : max_accepted;
    }

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1], got " + std::to_string(alpha));
        if (node_count < 2) throw ConfigError("node count must be >= 2");
        if (node_count > std::numeric_limits<Node>::max()) throw ConfigError("node count exceeds 2^32-1");
        if (sample_every < 1) throw ConfigError("sample_every must be >= 1");
        if (accepted_limit() < 1) throw ConfigError("max_accepted must be >= 1");
    }
};

struct EngineState {
    std::uint64_t t = 1;
    std::uint64_t u = 1;
    std::uint64_t k = 2;
    ComponentPartition<Node> partition;
    Edge pending;

    explicit EngineState(std::uint64_t n) : partition(n) {}
};

enum class StepCase { SameComponent, SmallMerge, BigMergeAccepted, BigMergeRejected };

inline std::string_view to_string(StepCase c) {
    switch (c) {
        case StepCase::SameComponent: return "same_component";
        case StepCase::SmallMerge: return "small_merge";
        case StepCase::BigMergeAccepted: return "big_merge_accepted";
        case StepCase::BigMergeRejected: return "big_merge_rejected";
    }
    return "unknown";
}

struct StepOutcome {
    StepCase case_tag = StepCase::SameComponent;
    std::uint64_t delta_k = 0;
    bool accepted = true;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> merged_sizes;  ///< endpoint component sizes

    friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

/**
 * Outcome of one sampled edge at (t, u, k). `sizes` holds the endpoint
 * component sizes, or nothing when both endpoints share a component (l is
 * then that component's size, which never exceeds k).
 */
inline StepOutcome resolve_edge(std::optional<std::pair<std::uint64_t, std::uint64_t>> sizes, std::uint64_t t,
                                std::uint64_t u, std::uint64_t k, double alpha) {
    StepOutcome out;
    if (!sizes) {
        out.case_tag = StepCase::SameComponent;
        return out;
    }
    out.merged_sizes = sizes;
    const std::uint64_t l = sizes->first + sizes->second;
    if (l <= k) {
        out.case_tag = StepCase::SmallMerge;
        return out;
    }
    const std::uint64_t needed = l - k;
    const IncrementCap cap = cap_increments(t, u, k, alpha);
    if (cap.covers(needed)) {
        out.case_tag = StepCase::BigMergeAccepted;
        out.delta_k = needed;
    } else {
        out.case_tag = StepCase::BigMergeRejected;
        out.delta_k = cap.value;
        out.accepted = false;
    }
    return out;
}

/**
 * One live BFW(alpha) run.
 *
 * Each `step` resolves the pending edge completely: stage increments that
 * re-test the same edge are folded into `delta_k`, so one call corresponds
 * to one sampled edge and advances u by exactly one.
 */
class Engine {
public:
    explicit Engine(EngineConfig config) : config_(validated(config)), state_(config.node_count), rng_(config.seed) {
        state_.pending = sample_edge(rng_, config_.node_count);
    }

    [[nodiscard]] const EngineConfig& config() const noexcept { return config_; }
    [[nodiscard]] const EngineState& state() const noexcept { return state_; }
    [[nodiscard]] bool finished() const noexcept { return state_.t >= config_.accepted_limit(); }

    /// Decides the pending edge without mutating the run.
    StepOutcome plan() {
        auto& p = state_.partition;
        const Node ra = p.find(state_.pending.a);
        const Node rb = p.find(state_.pending.b);
        if (ra == rb) return resolve_edge(std::nullopt, state_.t, state_.u, state_.k, config_.alpha);
        return resolve_edge(std::pair{p.root_size(ra), p.root_size(rb)}, state_.t, state_.u, state_.k, config_.alpha);
    }

    /// Applies a decision produced by `plan()` on the current state.
    void apply(const StepOutcome& out) {
        state_.k += out.delta_k;
        if (out.accepted) {
            if (out.case_tag != StepCase::SameComponent) state_.partition.merge(state_.pending.a, state_.pending.b);
            ++state_.t;
        }
        ++state_.u;
        state_.pending = sample_edge(rng_, config_.node_count);
    }

    StepOutcome step() {
        if (finished()) throw ContractError("step: accepted-edge limit already reached");
        StepOutcome out = plan();
        apply(out);
        return out;
    }

    [[nodiscard]] TraceRecord observe() const { return bfw::observe(state_.partition, state_.u, state_.t, state_.k, config_.top_k); }

    /// Moves the final state out; the engine must not be used afterwards.
    EngineState release() && { return std::move(state_); }

private:
    static const EngineConfig& validated(const EngineConfig& c) {
        c.validate();
        return c;
    }

    EngineConfig config_;
    EngineState state_;
    Rng rng_;
};

struct RunStats {
    std::uint64_t same_component = 0;
    std::uint64_t small_merges = 0;
    std::uint64_t big_accepted = 0;
    std::uint64_t big_rejected = 0;
};

struct RunResult {
    EngineConfig config;
    EngineState final_state;
    std::vector<TraceRecord> trace;
    RunStats stats;
};

/**
 * Runs until t reaches the accepted-edge limit.
 *
 * Records the initial state, every `sample_every`-th sampled edge, every
 * accepted merge that raised k (every accepted merge with `record_merges`),
 * and the final state. Records are unique in u.
 */
inline RunResult run(const EngineConfig& config) {
    Engine engine(config);
    std::vector<TraceRecord> trace;
    RunStats stats;

    auto record = [&] {
        if (!trace.empty() && trace.back().u == engine.state().u) return;
        trace.push_back(engine.observe());
    };

    record();
    while (!engine.finished()) {
        const StepOutcome out = engine.plan();
        engine.apply(out);
        switch (out.case_tag) {
            case StepCase::SameComponent: ++stats.same_component; break;
            case StepCase::SmallMerge: ++stats.small_merges; break;
            case StepCase::BigMergeAccepted: ++stats.big_accepted; break;
            case StepCase::BigMergeRejected: ++stats.big_rejected; break;
        }
        const bool merged = out.accepted && out.case_tag != StepCase::SameComponent;
        if ((merged && (out.delta_k > 0 || config.record_merges)) || engine.state().u % config.sample_every == 0)
            record();
    }
    record();
    return {engine.config(), std::move(engine).release(), std::move(trace), stats};
}

}  // namespace bfw

#endif  // BFW_ENGINE_HPP
