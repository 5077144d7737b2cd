#ifndef BFW_PARTITION_HPP
#define BFW_PARTITION_HPP

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfw/error.hpp"

namespace bfw {

/// Sums over all components whose size is at most some limit.
struct PrefixSums {
    std::uint64_t sum = 0;     ///< sum of sizes
    std::uint64_t sum_sq = 0;  ///< sum of squared sizes

    friend bool operator==(const PrefixSums&, const PrefixSums&) = default;
};

/**
 * Immutable snapshot of the component-size multiset.
 *
 * Stores one entry per distinct size, ascending, with running totals so that
 * range sums are a binary search away. Cheap to copy relative to the
 * partition itself (O(distinct sizes)), and safe to read from many threads.
 */
class SizeIndex {
public:
    struct Entry {
        std::uint64_t size = 0;
        std::uint64_t count = 0;
        std::uint64_t cum_count = 0;   ///< components with size <= this size
        std::uint64_t cum_sum = 0;     ///< sum of sizes <= this size
        std::uint64_t cum_sum_sq = 0;  ///< sum of squared sizes <= this size
    };

    SizeIndex() = default;

    /// Builds from ascending, distinct (size, count) pairs with count > 0.
    static SizeIndex from_histogram(std::span<const std::pair<std::uint64_t, std::uint64_t>> hist) {
        SizeIndex out;
        out.entries_.reserve(hist.size());
        Entry acc;
        for (const auto& [size, count] : hist) {
            acc.size = size;
            acc.count = count;
            acc.cum_count += count;
            acc.cum_sum += size * count;
            acc.cum_sum_sq += size * size * count;
            out.entries_.push_back(acc);
        }
        return out;
    }

    [[nodiscard]] const std::vector<Entry>& entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t distinct_sizes() const noexcept { return entries_.size(); }

    [[nodiscard]] std::uint64_t component_count() const noexcept {
        return entries_.empty() ? 0 : entries_.back().cum_count;
    }
    [[nodiscard]] std::uint64_t total_size() const noexcept {
        return entries_.empty() ? 0 : entries_.back().cum_sum;
    }
    [[nodiscard]] std::uint64_t total_sum_sq() const noexcept {
        return entries_.empty() ? 0 : entries_.back().cum_sum_sq;
    }

    [[nodiscard]] std::uint64_t largest() const {
        if (entries_.empty()) throw ContractError("largest: empty size index");
        return entries_.back().size;
    }

    /// Two smallest sizes with multiplicity, ascending.
    [[nodiscard]] std::pair<std::uint64_t, std::uint64_t> two_smallest() const {
        if (component_count() < 2) throw ContractError("two_smallest: fewer than 2 components");
        const Entry& first = entries_.front();
        if (first.count >= 2) return {first.size, first.size};
        return {first.size, entries_[1].size};
    }

    /// Sum and sum of squares over sizes s <= limit.
    [[nodiscard]] PrefixSums prefix(std::uint64_t limit) const noexcept {
        auto it = std::upper_bound(entries_.begin(), entries_.end(), limit,
                                   [](std::uint64_t v, const Entry& e) { return v < e.size; });
        if (it == entries_.begin()) return {};
        --it;
        return {it->cum_sum, it->cum_sum_sq};
    }

    /// The `k` largest sizes, descending, with multiplicity.
    [[nodiscard]] std::vector<std::uint64_t> top(std::size_t k) const {
        std::vector<std::uint64_t> out;
        out.reserve(std::min<std::uint64_t>(k, component_count()));
        for (auto it = entries_.rbegin(); it != entries_.rend() && out.size() < k; ++it) {
            for (std::uint64_t c = 0; c < it->count && out.size() < k; ++c) out.push_back(it->size);
        }
        return out;
    }

private:
    std::vector<Entry> entries_;
};

/**
 * Union-find over n nodes tracking every size statistic the BFW dynamics
 * need: per-root sizes, the component count, the exact integer sum of
 * squared sizes, the largest size and a size histogram.
 *
 * Union by size with path compression; equal sizes attach the higher root id
 * under the lower one. `merge` is O(alpha(n)) amortised. The ordered size
 * index is rebuilt lazily by `size_index()`, in time proportional to the
 * number of distinct sizes plus merges since the previous rebuild.
 *
 * Single writer; not internally synchronised.
 */
template <std::unsigned_integral Index = std::uint32_t>
class ComponentPartition {
public:
    using index_type = Index;

    explicit ComponentPartition(std::uint64_t n) {
        if (n < 2) throw ConfigError("partition needs at least 2 nodes, got " + std::to_string(n));
        if (n > std::numeric_limits<Index>::max() || n > (std::uint64_t{1} << 32))
            throw ConfigError("partition node count " + std::to_string(n) + " exceeds index range");
        parent_.resize(n);
        for (std::uint64_t v = 0; v < n; ++v) parent_[v] = static_cast<Index>(v);
        size_.assign(n, 1);
        count_by_size_.assign(n + 1, 0);
        count_by_size_[1] = n;
        distinct_ = {1};
        node_count_ = n;
        component_count_ = n;
        sum_sq_ = n;
        largest_ = 1;
    }

    [[nodiscard]] std::uint64_t node_count() const noexcept { return node_count_; }
    [[nodiscard]] std::uint64_t component_count() const noexcept { return component_count_; }
    [[nodiscard]] std::uint64_t sum_sq_sizes() const noexcept { return sum_sq_; }
    [[nodiscard]] std::uint64_t largest() const noexcept { return largest_; }

    Index find(Index v) {
        check_node(v);
        Index root = v;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[v] != root) {
            Index next = parent_[v];
            parent_[v] = root;
            v = next;
        }
        return root;
    }

    /// Size of the component containing `v`.
    std::uint64_t size_of(Index v) { return size_[find(v)]; }

    /// Size stored at a root; `root` must be a representative.
    [[nodiscard]] std::uint64_t root_size(Index root) const noexcept { return size_[root]; }
    [[nodiscard]] bool is_root(Index v) const noexcept { return parent_[v] == v; }

    /// Joins the components of `a` and `b`; returns the merged size.
    std::uint64_t merge(Index a, Index b) {
        Index ra = find(a);
        Index rb = find(b);
        if (ra == rb) throw ContractError("merge: nodes already share a component");
        if (size_[ra] < size_[rb] || (size_[ra] == size_[rb] && rb < ra)) std::swap(ra, rb);

        const std::uint64_t sa = size_[ra];
        const std::uint64_t sb = size_[rb];
        const std::uint64_t merged = sa + sb;
        parent_[rb] = ra;
        size_[ra] = static_cast<Index>(merged);

        --count_by_size_[sa];
        --count_by_size_[sb];
        if (count_by_size_[merged]++ == 0) pending_.push_back(merged);
        sum_sq_ += 2 * sa * sb;
        --component_count_;
        largest_ = std::max(largest_, merged);
        index_stale_ = true;
        return merged;
    }

    /// Current ordered size snapshot, rebuilt if merges happened since the last call.
    /// The rebuild touches a cache, so concurrent calls on one partition are not safe.
    const SizeIndex& size_index() const {
        if (index_stale_) rebuild_index();
        return index_;
    }

    [[nodiscard]] std::pair<std::uint64_t, std::uint64_t> two_smallest() const { return size_index().two_smallest(); }
    [[nodiscard]] PrefixSums size_prefix_sum(std::uint64_t limit) const { return size_index().prefix(limit); }

    /// Sizes of all components, one entry per root, in root-id order.
    [[nodiscard]] std::vector<std::uint64_t> component_sizes() const {
        std::vector<std::uint64_t> out;
        out.reserve(component_count_);
        for (std::uint64_t v = 0; v < node_count_; ++v)
            if (parent_[v] == v) out.push_back(size_[v]);
        return out;
    }

private:
    void check_node(Index v) const {
        if (v >= node_count_)
            throw ContractError("node id " + std::to_string(v) + " out of range [0," +
                                std::to_string(node_count_) + ")");
    }

    void rebuild_index() const {
        std::sort(pending_.begin(), pending_.end());
        std::vector<std::uint64_t> next;
        next.reserve(distinct_.size() + pending_.size());
        std::merge(distinct_.begin(), distinct_.end(), pending_.begin(), pending_.end(),
                   std::back_inserter(next));
        next.erase(std::unique(next.begin(), next.end()), next.end());
        std::erase_if(next, [this](std::uint64_t s) { return count_by_size_[s] == 0; });
        distinct_ = std::move(next);
        pending_.clear();

        std::vector<std::pair<std::uint64_t, std::uint64_t>> hist;
        hist.reserve(distinct_.size());
        for (std::uint64_t s : distinct_) hist.emplace_back(s, count_by_size_[s]);
        index_ = SizeIndex::from_histogram(hist);
        index_stale_ = false;
    }

    std::vector<Index> parent_;
    std::vector<Index> size_;
    std::vector<std::uint64_t> count_by_size_;
    // Lazily rebuilt size index.
    mutable std::vector<std::uint64_t> distinct_;  // ascending, may hold sizes whose count dropped to 0
    mutable std::vector<std::uint64_t> pending_;   // sizes that became present since the last rebuild
    mutable SizeIndex index_;
    mutable bool index_stale_ = true;
    std::uint64_t node_count_ = 0;
    std::uint64_t component_count_ = 0;
    std::uint64_t sum_sq_ = 0;
    std::uint64_t largest_ = 0;
};

}  // namespace bfw

#endif  // BFW_PARTITION_HPP
