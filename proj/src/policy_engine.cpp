#include "streetx/policy_engine.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace streetx {

ConstraintSet compile_policy(const ResolvedPolicy& policy, const StreamMeta& stream_meta,
                             const std::string& user_id, std::int64_t policy_id,
                             std::vector<std::string>* warnings) {
    ConstraintSet out;
    out.stream_id = stream_meta.id;
    out.user_id = user_id;
    out.source_policy_ids.push_back(policy_id);

    bool any_positive_where = false;
    for (const auto& term : policy.where) {
        if (term.negated)
            out.deny_polygons.push_back({term.keyword, term.polygon});
        else {
            out.allow_polygons.push_back({term.keyword, term.polygon});
            any_positive_where = true;
        }
    }
    if (!policy.where.empty() && !any_positive_where && warnings)
        warnings->push_back("policy has only negated Where terms; all space outside the denied "
                            "regions is allowed");

    const IntervalSet span = stream_meta.full_span();
    IntervalSet allow_time;
    IntervalSet deny_time;
    bool any_positive_when = false;
    for (const auto& term : policy.when) {
        IntervalSet expanded;
        if (term.literal_window) {
            expanded = IntervalSet::single(term.literal_window->start, term.literal_window->end);
        } else if (term.windows) {
            expanded = *term.windows;
        } else if (!span.empty()) {
            expanded = expand_recurrence(*term.recurrence,
                                         TimeWindow{span.windows().front().start,
                                                    span.windows().back().end});
        }
        out.time_entries.push_back({term.keyword, term.negated, expanded});
        if (term.negated) {
            deny_time = unite(deny_time, expanded);
        } else {
            allow_time = unite(allow_time, expanded);
            any_positive_when = true;
        }
    }
    if (!any_positive_when) {
        // No positive When term: the stream's full metadata span is allowed.
        allow_time = span;
        if (!policy.when.empty() && warnings)
            warnings->push_back("policy has only negated When terms; the full stream span minus "
                                "the exclusions is allowed");
    }
    out.allowed_time = subtract(allow_time, deny_time);
    out.denied_time = deny_time;
    if (out.allowed_time.empty() && warnings)
        warnings->push_back("policy grants no time access to stream '" + stream_meta.id + "'");

    out.time_resolution = policy.time_resolution;
    out.space_resolution = policy.space_resolution;
    out.sharing = policy.sharing;

    PolicySlice slice;
    slice.policy_id = policy_id;
    slice.allow_polygons = out.allow_polygons;
    slice.deny_polygons = out.deny_polygons;
    slice.allowed_time = out.allowed_time;
    if (policy.time_resolution)
        slice.resolution = ResolutionSpec{ResolutionSpec::Dimension::Time, *policy.time_resolution, {}};
    else if (policy.space_resolution)
        slice.resolution =
            ResolutionSpec{ResolutionSpec::Dimension::Space, TimeBucket::Hour, *policy.space_resolution};
    out.slices.push_back(std::move(slice));
    return out;
}

namespace {

// Conservative spatial-scope overlap between two policies: any polygon pair
// (allow or deny) with intersecting bounding boxes. A policy with an empty
// allow list grants all space, so it overlaps everything.
bool slices_space_overlap(const PolicySlice& a, const PolicySlice& b) {
    if (a.allow_polygons.empty() || b.allow_polygons.empty()) return true;
    auto polys = [](const PolicySlice& s) {
        std::vector<const NamedPolygon*> out;
        for (const auto& p : s.allow_polygons) out.push_back(&p);
        for (const auto& p : s.deny_polygons) out.push_back(&p);
        return out;
    };
    for (const auto* x : polys(a))
        for (const auto* y : polys(b))
            if (x->polygon.bbox().overlaps(y->polygon.bbox())) return true;
    return false;
}

template <class T>
void append_unique(std::vector<T>& dst, const std::vector<T>& src) {
    for (const auto& item : src)
        if (std::find(dst.begin(), dst.end(), item) == dst.end()) dst.push_back(item);
}

bool slices_overlap(const PolicySlice& a, const PolicySlice& b) {
    return a.allowed_time.intersects(b.allowed_time) && slices_space_overlap(a, b);
}

}  // namespace

int resolution_coarseness(const std::optional<ResolutionSpec>& spec) {
    if (!spec) return 0;
    if (spec->dimension == ResolutionSpec::Dimension::Time)
        return 1 + static_cast<int>(spec->bucket);  // Second..Year
    static const char* order[4] = {"ZipCodes", "City", "County", "Country"};
    for (int i = 0; i < 4; ++i)
        if (spec->boundary_set == order[i]) return 1 + i;
    return 1;  // unknown space set: treat as finest space resolution
}

ConstraintSet merge_policies(const std::vector<ConstraintSet>& sets) {
    if (sets.empty()) throw std::invalid_argument("merge_policies needs at least one constraint set");
    for (const auto& s : sets)
        if (s.stream_id != sets.front().stream_id || s.user_id != sets.front().user_id)
            throw std::invalid_argument("merge_policies inputs must share stream id and user id");
    if (sets.size() == 1) return sets.front();

    // Gather slices; scenario detection is pairwise over source policies.
    std::vector<PolicySlice> slices;
    for (const auto& s : sets)
        slices.insert(slices.end(), s.slices.begin(), s.slices.end());

    bool any_overlap = false;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        for (std::size_t j = i + 1; j < slices.size(); ++j) {
            if (!slices_overlap(slices[i], slices[j])) continue;
            any_overlap = true;
            const auto& ri = slices[i].resolution;
            const auto& rj = slices[j].resolution;
            if (ri && rj && ri->dimension != rj->dimension)
                throw PolicyConflictError(
                    "policies " + std::to_string(slices[i].policy_id) + " and " +
                    std::to_string(slices[j].policy_id) +
                    " overlap in space and time with incomparable resolutions (" + ri->display() +
                    " vs " + rj->display() + "); time and space resolutions cannot be compared");
        }
    }

    ConstraintSet out;
    out.stream_id = sets.front().stream_id;
    out.user_id = sets.front().user_id;
    IntervalSet allowed;
    bool any_all_space = false;
    for (const auto& s : sets) {
        // Identical keyword entries contributed by several policies collapse.
        append_unique(out.allow_polygons, s.allow_polygons);
        append_unique(out.deny_polygons, s.deny_polygons);
        append_unique(out.time_entries, s.time_entries);
        out.source_policy_ids.insert(out.source_policy_ids.end(), s.source_policy_ids.begin(),
                                     s.source_policy_ids.end());
        allowed = unite(allowed, s.allowed_time);
        out.denied_time = unite(out.denied_time, s.denied_time);
        if (s.all_space()) any_all_space = true;
    }
    // With overlapping scopes, every policy's exclusions dominate globally.
    out.allowed_time = any_overlap ? subtract(allowed, out.denied_time) : allowed;
    if (any_all_space) out.allow_polygons.clear();  // all space allowed subsumes any allow list
    out.slices = std::move(slices);

    // Summary resolutions: the coarsest of each dimension (the slice list
    // carries the per-policy detail).
    for (const auto& sl : out.slices) {
        if (!sl.resolution) continue;
        if (sl.resolution->dimension == ResolutionSpec::Dimension::Time) {
            if (!out.time_resolution || static_cast<int>(*out.time_resolution) <
                                            static_cast<int>(sl.resolution->bucket))
                out.time_resolution = sl.resolution->bucket;
        } else if (!out.space_resolution ||
                   resolution_coarseness(ResolutionSpec{ResolutionSpec::Dimension::Space,
                                                        TimeBucket::Hour, *out.space_resolution}) <
                       resolution_coarseness(sl.resolution)) {
            out.space_resolution = sl.resolution->boundary_set;
        }
    }

    // Sharing merges by least privilege: any deny wins; PolicyUpdateEffect
    // sticks if any allowing policy carries it.
    for (const auto& s : sets) {
        switch (s.sharing.mode) {
            case SharingSpec::Mode::Deny:
                out.sharing.mode = SharingSpec::Mode::Deny;
                break;
            case SharingSpec::Mode::Allow:
                if (out.sharing.mode != SharingSpec::Mode::Deny)
                    out.sharing.mode = SharingSpec::Mode::Allow;
                out.sharing.policy_update_effect |= s.sharing.policy_update_effect;
                break;
            case SharingSpec::Mode::Unspecified:
                break;
        }
    }
    if (out.sharing.mode == SharingSpec::Mode::Deny) out.sharing.policy_update_effect = false;
    return out;
}

EffectiveQuery effective_constraints(const BoundingBox& query_box, const TimeWindow& query_range,
                                     std::shared_ptr<const ConstraintSet> merged) {
    EffectiveQuery eff;
    eff.stream_id = merged->stream_id;
    eff.query_box = query_box;
    eff.query_range = query_range;
    eff.effective_time =
        intersect(IntervalSet::single(query_range.start, query_range.end), merged->allowed_time);
    if (merged->time_resolution)
        eff.redirect = ResolutionSpec{ResolutionSpec::Dimension::Time, *merged->time_resolution, {}};
    else if (merged->space_resolution)
        eff.redirect = ResolutionSpec{ResolutionSpec::Dimension::Space, TimeBucket::Hour,
                                      *merged->space_resolution};
    eff.merged = std::move(merged);
    return eff;
}

bool record_passes(const DataRecord& rec, const std::vector<NamedPolygon>& allow, bool all_space,
                   const std::vector<NamedPolygon>& deny, const IntervalSet& time) {
    if (!time.contains(rec.timestamp)) return false;
    const GeoPoint p{rec.lat, rec.lng};
    if (!all_space) {
        bool inside = false;
        for (const auto& a : allow) {
            if (point_in_polygon(p, a.polygon)) {
                inside = true;
                break;
            }
        }
        if (!inside) return false;
    }
    for (const auto& d : deny)
        if (point_in_polygon(p, d.polygon)) return false;
    return true;
}

bool filter_record(const DataRecord& rec, const EffectiveQuery& eff) {
    return record_passes(rec, eff.merged->allow_polygons, eff.merged->all_space(),
                         eff.merged->deny_polygons, eff.effective_time);
}

nlohmann::json constraints_to_json(const ConstraintSet& set) {
    auto polygon_json = [](const Polygon& poly) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : poly.ring()) out.push_back({{"lat", p.lat}, {"lng", p.lng}});
        return out;
    };
    nlohmann::json allow = nlohmann::json::array();
    for (const auto& a : set.allow_polygons)
        allow.push_back({{"Keyword", a.keyword}, {"Polygon", polygon_json(a.polygon)}});
    nlohmann::json deny = nlohmann::json::array();
    for (const auto& d : set.deny_polygons)
        deny.push_back({{"Keyword", d.keyword}, {"Polygon", polygon_json(d.polygon)}});
    nlohmann::json time = nlohmann::json::array();
    for (const auto& entry : set.time_entries) {
        nlohmann::json windows = nlohmann::json::array();
        for (const auto& w : entry.windows.windows())
            windows.push_back({{"start", w.start}, {"end", w.end}});
        time.push_back({{"Keyword", entry.keyword},
                        {entry.negated ? "Deny" : "Allow", std::move(windows)}});
    }
    return {{"Space", {{"Allow", std::move(allow)}, {"Deny", std::move(deny)}}},
            {"Time", std::move(time)}};
}

}  // namespace streetx
