#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "streetx/policy_engine.hpp"

namespace streetx {

// A cache entry: the merged, grouped constraints for one (stream, user) pair.
struct PreparedConstraints {
    std::shared_ptr<const ConstraintSet> merged;
    std::size_t polygons_grouped_away = 0;
};

/// In-memory constraint cache keyed by (stream id, user id). Lookups are
/// concurrent; mutations replace whole snapshots atomically, so a query keeps
/// one consistent snapshot for its entire evaluation.
class ConstraintCache {
public:
    using Key = std::pair<std::string, std::string>;

    std::shared_ptr<const PreparedConstraints> find(const std::string& stream_id,
                                                    const std::string& user_id) const;
    void put(const std::string& stream_id, const std::string& user_id,
             std::shared_ptr<const PreparedConstraints> entry);
    void erase(const std::string& stream_id, const std::string& user_id);
    std::map<Key, std::shared_ptr<const PreparedConstraints>> snapshot() const;
    std::size_t size() const;

private:
    mutable std::shared_mutex mu_;
    std::map<Key, std::shared_ptr<const PreparedConstraints>> map_;
};

// The rejection pre-check. False only when the query is provably empty:
// (a) the query range misses every allowed window, or (b) the allow list is
// non-empty and the query box intersects no allow polygon, or (c) the query
// box lies completely within some single deny polygon. Never false for a
// query whose exact evaluation yields a record.
bool satisfiable(const BoundingBox& query_box, const TimeWindow& query_range,
                 const ConstraintSet& merged);

// Removes allow polygons contained in another allow polygon and deny
// polygons contained in another deny polygon (exact duplicates collapse
// first). Filter-equivalent to the input; `removed` reports how many entries
// were dropped.
ConstraintSet group_constraints(ConstraintSet merged, std::size_t* removed = nullptr);

struct AuditReport {
    std::vector<std::string> divergences;
    bool clean() const { return divergences.empty(); }
};

// Diffs the cache against freshly recompiled truth. `recompiled` holds what
// the policy store currently implies; every mismatch, missing, or stale entry
// becomes one divergence line.
AuditReport audit_cache(const ConstraintCache& cache,
                        const std::map<ConstraintCache::Key, ConstraintSet>& recompiled);

struct OptimizerStats {
    std::atomic<std::uint64_t> queries_seen{0};
    std::atomic<std::uint64_t> queries_rejected{0};
    std::atomic<std::uint64_t> polygons_grouped_away{0};
};

}  // namespace streetx
