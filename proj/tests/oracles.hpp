// Independent oracles used by the unit and acceptance suites. Everything here
// deliberately avoids the library's own predicate implementations: containment
// is re-derived via winding numbers, set predicates via rasterization, the
// store via linear scans.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <optional>
#include <vector>

#include "streetx/bench.hpp"
#include "streetx/geometry.hpp"
#include "streetx/policy_engine.hpp"
#include "streetx/store.hpp"
#include "streetx/temporal.hpp"

namespace oracle {

using streetx::BoundingBox;
using streetx::DataRecord;
using streetx::GeoPoint;
using streetx::IntervalSet;
using streetx::Polygon;
using streetx::SplitMix64;
using streetx::TimeWindow;

// Winding-number containment; points on the boundary count as inside.
inline bool winding_inside(const GeoPoint& p, const std::vector<GeoPoint>& ring) {
    const std::size_t m = ring.size() - 1;
    auto is_left = [](const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
        return (b.lng - a.lng) * (c.lat - a.lat) - (c.lng - a.lng) * (b.lat - a.lat);
    };
    for (std::size_t i = 0; i < m; ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[i + 1];
        if (is_left(a, b, p) == 0.0 && p.lat >= std::min(a.lat, b.lat) &&
            p.lat <= std::max(a.lat, b.lat) && p.lng >= std::min(a.lng, b.lng) &&
            p.lng <= std::max(a.lng, b.lng))
            return true;
    }
    int wn = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const GeoPoint& a = ring[i];
        const GeoPoint& b = ring[i + 1];
        if (a.lat <= p.lat) {
            if (b.lat > p.lat && is_left(a, b, p) > 0) ++wn;
        } else {
            if (b.lat <= p.lat && is_left(a, b, p) < 0) --wn;
        }
    }
    return wn != 0;
}

inline bool winding_inside(const GeoPoint& p, const Polygon& poly) {
    return winding_inside(p, poly.ring());
}

// Rasterization oracle for box/polygon set predicates: classify grid-cell
// centers over the combined envelope. `margin_cells` widens or shrinks the
// box by whole cells to sidestep boundary ambiguity.
struct Raster {
    BoundingBox frame;
    int n;
    double dlat, dlng;

    Raster(const BoundingBox& a, const BoundingBox& b, int n_) : n(n_) {
        frame.lat_min = std::min(a.lat_min, b.lat_min);
        frame.lat_max = std::max(a.lat_max, b.lat_max);
        frame.lng_min = std::min(a.lng_min, b.lng_min);
        frame.lng_max = std::max(a.lng_max, b.lng_max);
        dlat = (frame.lat_max - frame.lat_min) / n;
        dlng = (frame.lng_max - frame.lng_min) / n;
    }

    GeoPoint center(int iy, int ix) const {
        return {frame.lat_min + (iy + 0.5) * dlat, frame.lng_min + (ix + 0.5) * dlng};
    }
};

// Does any cell center fall in both the box and the polygon?
inline bool raster_overlap(const BoundingBox& box, const Polygon& poly, int n,
                           double margin_cells) {
    Raster r(box, poly.bbox(), n);
    const BoundingBox probe{box.lat_min - margin_cells * r.dlat, box.lat_max + margin_cells * r.dlat,
                            box.lng_min - margin_cells * r.dlng,
                            box.lng_max + margin_cells * r.dlng};
    for (int iy = 0; iy < r.n; ++iy)
        for (int ix = 0; ix < r.n; ++ix) {
            const GeoPoint c = r.center(iy, ix);
            if (probe.contains(c) && winding_inside(c, poly)) return true;
        }
    return false;
}

// Is every cell center inside the box also inside the polygon? `shrink_cells`
// ignores a boundary band of the box.
inline bool raster_box_within(const BoundingBox& box, const Polygon& poly, int n,
                              double shrink_cells) {
    Raster r(box, poly.bbox(), n);
    const BoundingBox probe{box.lat_min + shrink_cells * r.dlat, box.lat_max - shrink_cells * r.dlat,
                            box.lng_min + shrink_cells * r.dlng,
                            box.lng_max - shrink_cells * r.dlng};
    for (int iy = 0; iy < r.n; ++iy)
        for (int ix = 0; ix < r.n; ++ix) {
            const GeoPoint c = r.center(iy, ix);
            if (probe.contains(c) && !winding_inside(c, poly)) return false;
        }
    return true;
}

// Is every inner-polygon cell center inside the outer polygon?
inline bool raster_polygon_within(const Polygon& inner, const Polygon& outer, int n) {
    Raster r(inner.bbox(), outer.bbox(), n);
    for (int iy = 0; iy < r.n; ++iy)
        for (int ix = 0; ix < r.n; ++ix) {
            const GeoPoint c = r.center(iy, ix);
            if (winding_inside(c, inner) && !winding_inside(c, outer)) return false;
        }
    return true;
}

// Random star-shaped polygon: angles strictly increasing around a center
// with positive radii, which guarantees a simple ring.
inline Polygon random_star_polygon(SplitMix64& rng, const GeoPoint& center, double max_radius_deg,
                                   std::size_t vertices) {
    std::vector<double> angles(vertices);
    for (auto& a : angles) a = rng.uniform(0.0, 2.0 * M_PI);
    std::sort(angles.begin(), angles.end());
    // nudge duplicate angles apart
    for (std::size_t i = 1; i < angles.size(); ++i)
        if (angles[i] - angles[i - 1] < 1e-9) angles[i] = angles[i - 1] + 1e-9;
    std::vector<GeoPoint> ring;
    ring.reserve(vertices + 1);
    for (std::size_t i = 0; i < vertices; ++i) {
        const double radius = max_radius_deg * rng.uniform(0.2, 1.0);
        ring.push_back({center.lat + radius * std::sin(angles[i]),
                        center.lng + radius * std::cos(angles[i])});
    }
    ring.push_back(ring.front());
    return Polygon(std::move(ring));
}

// Membership-sampled interval-set oracle over a bounded integer domain.
inline bool equal_by_membership(const IntervalSet& got, std::int64_t lo, std::int64_t hi,
                                const std::vector<TimeWindow>& a, const std::vector<TimeWindow>& b,
                                char op) {
    auto member = [](const std::vector<TimeWindow>& ws, std::int64_t t) {
        for (const auto& w : ws)
            if (t >= w.start && t < w.end) return true;
        return false;
    };
    for (std::int64_t t = lo; t < hi; ++t) {
        const bool in_a = member(a, t);
        const bool in_b = member(b, t);
        bool want = false;
        switch (op) {
            case '&': want = in_a && in_b; break;
            case '|': want = in_a || in_b; break;
            case '-': want = in_a && !in_b; break;
        }
        if (got.contains(t) != want) return false;
    }
    return true;
}

inline std::vector<TimeWindow> random_windows(SplitMix64& rng, std::size_t count, std::int64_t lo,
                                              std::int64_t hi) {
    std::vector<TimeWindow> out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::int64_t a = lo + std::int64_t(rng.below(std::uint64_t(hi - lo - 1)));
        const std::int64_t len = 1 + std::int64_t(rng.below(std::uint64_t((hi - a) / 4 + 1)));
        out.push_back({a, std::min(hi, a + len)});
    }
    return out;
}

// The brute-force record filter behind every engine-equivalence check:
// linear scan, box membership, interval membership, allow/deny containment
// via the winding oracle.
inline std::vector<DataRecord> brute_force_query(
    const std::vector<DataRecord>& records, const BoundingBox& box, const TimeWindow& range,
    const std::vector<Polygon>& allow, const std::vector<Polygon>& deny,
    const std::optional<IntervalSet>& allowed_time) {
    std::vector<DataRecord> out;
    for (const auto& rec : records) {
        const GeoPoint p{rec.lat, rec.lng};
        if (!box.contains(p)) continue;
        if (rec.timestamp < range.start || rec.timestamp >= range.end) continue;
        if (allowed_time && !allowed_time->contains(rec.timestamp)) continue;
        if (!allow.empty()) {
            bool ok = false;
            for (const auto& a : allow)
                if (winding_inside(p, a)) {
                    ok = true;
                    break;
                }
            if (!ok) continue;
        }
        bool denied = false;
        for (const auto& d : deny)
            if (winding_inside(p, d)) {
                denied = true;
                break;
            }
        if (!denied) out.push_back(rec);
    }
    return out;
}

inline bool same_records(std::vector<DataRecord> a, std::vector<DataRecord> b) {
    auto key = [](const DataRecord& r) {
        return std::tuple(r.timestamp, r.lat, r.lng, r.value);
    };
    auto cmp = [&](const DataRecord& x, const DataRecord& y) { return key(x) < key(y); };
    std::sort(a.begin(), a.end(), cmp);
    std::sort(b.begin(), b.end(), cmp);
    return a == b;
}

}  // namespace oracle
