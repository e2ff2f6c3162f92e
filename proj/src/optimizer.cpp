#include "streetx/optimizer.hpp"

#include <algorithm>

namespace streetx {

std::shared_ptr<const PreparedConstraints> ConstraintCache::find(const std::string& stream_id,
                                                                 const std::string& user_id) const {
    std::shared_lock lock(mu_);
    auto it = map_.find({stream_id, user_id});
    return it == map_.end() ? nullptr : it->second;
}

void ConstraintCache::put(const std::string& stream_id, const std::string& user_id,
                          std::shared_ptr<const PreparedConstraints> entry) {
    std::unique_lock lock(mu_);
    map_[{stream_id, user_id}] = std::move(entry);
}

void ConstraintCache::erase(const std::string& stream_id, const std::string& user_id) {
    std::unique_lock lock(mu_);
    map_.erase({stream_id, user_id});
}

std::map<ConstraintCache::Key, std::shared_ptr<const PreparedConstraints>>
ConstraintCache::snapshot() const {
    std::shared_lock lock(mu_);
    return map_;
}

std::size_t ConstraintCache::size() const {
    std::shared_lock lock(mu_);
    return map_.size();
}

bool satisfiable(const BoundingBox& query_box, const TimeWindow& query_range,
                 const ConstraintSet& merged) {
    if (!merged.allowed_time.intersects(
            IntervalSet::single(query_range.start, query_range.end)))
        return false;
    if (!merged.all_space()) {
        bool hits_allow = false;
        for (const auto& a : merged.allow_polygons) {
            if (!query_box.overlaps(a.polygon.bbox())) continue;  // cheap pre-test
            if (box_intersects_polygon(query_box, a.polygon)) {
                hits_allow = true;
                break;
            }
        }
        if (!hits_allow) return false;
    }
    for (const auto& d : merged.deny_polygons) {
        if (!query_box.within(d.polygon.bbox())) continue;  // cheap pre-test
        if (box_within_polygon(query_box, d.polygon)) return false;
    }
    return true;
}

namespace {

// Drops entries contained in (or duplicating) another entry of the same list.
std::vector<NamedPolygon> group_list(const std::vector<NamedPolygon>& in, std::size_t* removed) {
    std::vector<bool> drop(in.size(), false);
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (drop[i]) continue;
        for (std::size_t j = 0; j < in.size(); ++j) {
            if (i == j || drop[i]) continue;
            if (drop[j]) continue;
            if (in[i].polygon == in[j].polygon) {
                if (j > i) drop[j] = true;  // exact duplicate: keep the first
                continue;
            }
            if (in[i].polygon.bbox().within(in[j].polygon.bbox()) &&
                polygon_within_polygon(in[i].polygon, in[j].polygon))
                drop[i] = true;
        }
    }
    std::vector<NamedPolygon> out;
    for (std::size_t i = 0; i < in.size(); ++i) {
        if (drop[i]) {
            if (removed) ++*removed;
        } else {
            out.push_back(in[i]);
        }
    }
    return out;
}

}  // namespace

ConstraintSet group_constraints(ConstraintSet merged, std::size_t* removed) {
    std::size_t count = 0;
    merged.allow_polygons = group_list(merged.allow_polygons, &count);
    merged.deny_polygons = group_list(merged.deny_polygons, &count);
    if (removed) *removed += count;
    return merged;
}

AuditReport audit_cache(const ConstraintCache& cache,
                        const std::map<ConstraintCache::Key, ConstraintSet>& recompiled) {
    AuditReport report;
    const auto cached = cache.snapshot();
    for (const auto& [key, truth] : recompiled) {
        auto it = cached.find(key);
        if (it == cached.end()) {
            report.divergences.push_back("missing cache entry for (" + key.first + ", " +
                                         key.second + ")");
        } else if (!(*it->second->merged == truth)) {
            report.divergences.push_back("stale cache entry for (" + key.first + ", " +
                                         key.second + ")");
        }
    }
    for (const auto& [key, entry] : cached) {
        if (!recompiled.count(key))
            report.divergences.push_back("orphan cache entry for (" + key.first + ", " +
                                         key.second + ")");
    }
    return report;
}

}  // namespace streetx
