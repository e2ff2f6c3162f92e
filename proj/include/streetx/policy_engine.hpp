#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "streetx/geometry.hpp"
#include "streetx/policy_lang.hpp"
#include "streetx/store.hpp"
#include "streetx/temporal.hpp"

#include <nlohmann/json_fwd.hpp>

namespace streetx {

struct NamedPolygon {
    std::string keyword;
    Polygon polygon;
    friend bool operator==(const NamedPolygon&, const NamedPolygon&) = default;
};

// Keyword-level time windows, kept so the constraint JSON can echo the
// policy's When terms individually.
struct TimeEntry {
    std::string keyword;
    bool negated = false;
    IntervalSet windows;
    friend bool operator==(const TimeEntry&, const TimeEntry&) = default;
};

// One source policy's contribution, preserved through merging. Multi-policy
// evaluation with differing resolutions walks these slices.
struct PolicySlice {
    std::int64_t policy_id = 0;
    std::vector<NamedPolygon> allow_polygons;
    std::vector<NamedPolygon> deny_polygons;
    IntervalSet allowed_time;  // this policy's allow minus deny, canonical
    std::optional<ResolutionSpec> resolution;
    friend bool operator==(const PolicySlice&, const PolicySlice&) = default;
};

/// Compiled constraints for one (stream, user) pair — the in-memory form of
/// the policy translation. An empty allow list means "all space allowed";
/// compile_policy only produces that when the policy had no positive Where
/// term.
struct ConstraintSet {
    std::string stream_id;
    std::string user_id;
    std::vector<NamedPolygon> allow_polygons;
    std::vector<NamedPolygon> deny_polygons;
    IntervalSet allowed_time;   // already allow − deny, canonical
    IntervalSet denied_time;    // retained time exclusions (deny dominance)
    std::vector<TimeEntry> time_entries;
    std::optional<TimeBucket> time_resolution;
    std::optional<std::string> space_resolution;
    SharingSpec sharing;
    std::vector<std::int64_t> source_policy_ids;
    std::vector<PolicySlice> slices;

    bool all_space() const { return allow_polygons.empty(); }
    friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

struct PolicyConflictError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Translates one resolved policy into the constraints for (stream, user).
// When terms expand over the stream's metadata span: recurrences via
// expand_recurrence, absolute windows as given. No When construct grants the
// full span. Warnings flag deny-only constructs and empty time access.
ConstraintSet compile_policy(const ResolvedPolicy& policy, const StreamMeta& stream_meta,
                             const std::string& user_id, std::int64_t policy_id,
                             std::vector<std::string>* warnings = nullptr);

// Least-privilege union of all constraint sets for one (stream, user) pair.
// Deny polygons and time exclusions of every policy are retained globally
// when scopes overlap; incomparable resolutions (time vs space) on
// overlapping policies throw PolicyConflictError.
ConstraintSet merge_policies(const std::vector<ConstraintSet>& sets);

/// A user query intersected with the merged constraints, ready to evaluate.
struct EffectiveQuery {
    std::string stream_id;
    BoundingBox query_box;
    TimeWindow query_range;
    std::shared_ptr<const ConstraintSet> merged;
    IntervalSet effective_time;  // query range ∩ allowed_time
    std::optional<ResolutionSpec> redirect;  // resolution replica to read, if any
};

EffectiveQuery effective_constraints(const BoundingBox& query_box, const TimeWindow& query_range,
                                     std::shared_ptr<const ConstraintSet> merged);

// Exact per-record check: timestamp within the effective windows, inside
// some allow polygon (or all-space), and inside no deny polygon.
bool filter_record(const DataRecord& rec, const EffectiveQuery& eff);

// Same check against explicit lists; shared by the slice evaluator.
bool record_passes(const DataRecord& rec, const std::vector<NamedPolygon>& allow,
                   bool all_space, const std::vector<NamedPolygon>& deny,
                   const IntervalSet& time);

// Representation-2 shaped JSON: {"Space":{"Allow":[{"Keyword","Polygon"},..],
// "Deny":[..]},"Time":[{"Keyword","Allow":[{"start","end"},..]},..]}.
nlohmann::json constraints_to_json(const ConstraintSet& set);

// Orders resolutions by how much they reveal; larger is coarser. "No
// resolution" ranks lowest. Time buckets order by span; space boundary sets
// by the reserved ZipCodes < City < County < Country order.
int resolution_coarseness(const std::optional<ResolutionSpec>& spec);

}  // namespace streetx
