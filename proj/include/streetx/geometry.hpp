#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace streetx {

// Planar lat/lng geometry. Coordinates are treated as Cartesian (lng = x,
// lat = y); geodesic effects are ignored, which is fine at the ~500 km scale
// this engine targets. Boundary points count as inside for every predicate.

struct GeoPoint {
    double lat = 0.0;
    double lng = 0.0;

    friend bool operator==(const GeoPoint& a, const GeoPoint& b) {
        return a.lat == b.lat && a.lng == b.lng;
    }
};

// Throws std::invalid_argument unless lat/lng are finite and within
// [-90,90] x [-180,180].
void validate_point(const GeoPoint& p);

struct BoundingBox {
    double lat_min = 0.0;
    double lat_max = 0.0;
    double lng_min = 0.0;
    double lng_max = 0.0;

    bool contains(const GeoPoint& p) const {
        return p.lat >= lat_min && p.lat <= lat_max &&
               p.lng >= lng_min && p.lng <= lng_max;
    }
    bool overlaps(const BoundingBox& o) const {
        return lat_min <= o.lat_max && o.lat_min <= lat_max &&
               lng_min <= o.lng_max && o.lng_min <= lng_max;
    }
    // True iff this box lies entirely inside `o` (boundary contact allowed).
    bool within(const BoundingBox& o) const {
        return lat_min >= o.lat_min && lat_max <= o.lat_max &&
               lng_min >= o.lng_min && lng_max <= o.lng_max;
    }

    friend bool operator==(const BoundingBox& a, const BoundingBox& b) {
        return a.lat_min == b.lat_min && a.lat_max == b.lat_max &&
               a.lng_min == b.lng_min && a.lng_max == b.lng_max;
    }
};

// Throws std::invalid_argument unless bounds are finite, in range, and
// min <= max on both axes. Boxes wrapping the antimeridian are rejected by
// the range check (lng_min > lng_max never validates).
void validate_box(const BoundingBox& box);

/// Simple closed ring of lat/lng vertices, exterior ring only.
///
/// The stored ring is closed: front() == back(). Construction validates the
/// ring invariants (>= 4 vertices including the repeated closing vertex,
/// consecutive vertices distinct, no self-intersection) and throws
/// std::invalid_argument with a description of the first violation.
/// Validation is O(n^2) over edge pairs; it runs once at registration time.
class Polygon {
public:
    explicit Polygon(std::vector<GeoPoint> ring);

    const std::vector<GeoPoint>& ring() const { return ring_; }
    std::size_t vertex_count() const { return ring_.size() - 1; }  // distinct vertices
    std::size_t edge_count() const { return ring_.size() - 1; }
    const BoundingBox& bbox() const { return bbox_; }

    friend bool operator==(const Polygon& a, const Polygon& b) {
        return a.ring_ == b.ring_;
    }

private:
    std::vector<GeoPoint> ring_;
    BoundingBox bbox_;
};

// Cross product of (a-o) x (b-o) in the (lng, lat) plane. Sign gives
// orientation of the turn o->a->b.
double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b);

// p lies on the closed segment [a, b].
bool point_on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b);

// Closed segments [p1,p2] and [p3,p4] share at least one point (touching
// endpoints and collinear overlap both count).
bool segments_intersect(const GeoPoint& p1, const GeoPoint& p2,
                        const GeoPoint& p3, const GeoPoint& p4);

// Ray-casting containment test; points on the boundary count as inside.
bool point_in_polygon(const GeoPoint& p, const Polygon& poly);

// True iff box and polygon share at least one point. Tested as: any polygon
// vertex in the box, or any box corner in the polygon, or any box edge
// intersecting any polygon edge.
bool box_intersects_polygon(const BoundingBox& box, const Polygon& poly);

// True iff every point of the box is inside the polygon: all four corners
// inside and no polygon edge touching the box boundary.
bool box_within_polygon(const BoundingBox& box, const Polygon& poly);

// True iff inner lies entirely inside outer: every vertex of inner inside
// outer and no edge of inner crossing an edge of outer. Shared boundary
// segments are treated as a crossing, so the test is conservative.
bool polygon_within_polygon(const Polygon& inner, const Polygon& outer);

// Tight min/max envelope of the vertices.
BoundingBox polygon_bbox(const Polygon& poly);

// The four corners of a box, as a closed ring of 5 points.
std::vector<GeoPoint> box_corners_ring(const BoundingBox& box);

}  // namespace streetx
