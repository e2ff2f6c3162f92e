#include "streetx/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace streetx {

void validate_point(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lng))
        throw std::invalid_argument("point coordinates must be finite");
    if (p.lat < -90.0 || p.lat > 90.0)
        throw std::invalid_argument("latitude out of range [-90, 90]: " + std::to_string(p.lat));
    if (p.lng < -180.0 || p.lng > 180.0)
        throw std::invalid_argument("longitude out of range [-180, 180]: " + std::to_string(p.lng));
}

void validate_box(const BoundingBox& box) {
    validate_point({box.lat_min, box.lng_min});
    validate_point({box.lat_max, box.lng_max});
    if (box.lat_min > box.lat_max)
        throw std::invalid_argument("box lat_min > lat_max");
    if (box.lng_min > box.lng_max)
        throw std::invalid_argument("box lng_min > lng_max (antimeridian-wrapping boxes are not supported)");
}

double cross(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
    return (a.lng - o.lng) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lng - o.lng);
}

bool point_on_segment(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) {
    if (cross(a, b, p) != 0.0) return false;
    return p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat) &&
           p.lng >= std::min(a.lng, b.lng) && p.lng <= std::max(a.lng, b.lng);
}

namespace {

int orientation_sign(const GeoPoint& o, const GeoPoint& a, const GeoPoint& b) {
    const double c = cross(o, a, b);
    return c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
}

}  // namespace

bool segments_intersect(const GeoPoint& p1, const GeoPoint& p2,
                        const GeoPoint& p3, const GeoPoint& p4) {
    const int d1 = orientation_sign(p3, p4, p1);
    const int d2 = orientation_sign(p3, p4, p2);
    const int d3 = orientation_sign(p1, p2, p3);
    const int d4 = orientation_sign(p1, p2, p4);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    if (d1 == 0 && point_on_segment(p1, p3, p4)) return true;
    if (d2 == 0 && point_on_segment(p2, p3, p4)) return true;
    if (d3 == 0 && point_on_segment(p3, p1, p2)) return true;
    if (d4 == 0 && point_on_segment(p4, p1, p2)) return true;
    return false;
}

Polygon::Polygon(std::vector<GeoPoint> ring) : ring_(std::move(ring)) {
    if (ring_.size() < 4)
        throw std::invalid_argument(
            "polygon ring needs at least 4 vertices including the repeated closing vertex");
    for (const auto& p : ring_) validate_point(p);
    if (!(ring_.front() == ring_.back()))
        throw std::invalid_argument("polygon ring must be closed (first vertex repeated as last)");
    const std::size_t m = ring_.size() - 1;  // edge count
    for (std::size_t i = 0; i < m; ++i) {
        if (ring_[i] == ring_[i + 1])
            throw std::invalid_argument("polygon has repeated consecutive vertices at index " +
                                        std::to_string(i));
    }
    // Simplicity: no two non-adjacent edges may touch; adjacent edges may
    // only share their common vertex (a zero-angle spike is rejected).
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == m - 1);
            if (adjacent) {
                const GeoPoint& shared = (j == i + 1) ? ring_[j] : ring_[0];
                const GeoPoint& tail = (j == i + 1) ? ring_[i] : ring_[1];
                const GeoPoint& head = (j == i + 1) ? ring_[j + 1] : ring_[m - 1];
                const double dot = (tail.lng - shared.lng) * (head.lng - shared.lng) +
                                   (tail.lat - shared.lat) * (head.lat - shared.lat);
                if (cross(shared, tail, head) == 0.0 && dot > 0.0)
                    throw std::invalid_argument("polygon ring has a zero-angle spike at vertex " +
                                                std::to_string(j));
            } else if (segments_intersect(ring_[i], ring_[i + 1], ring_[j], ring_[j + 1])) {
                throw std::invalid_argument("polygon ring self-intersects (edges " +
                                            std::to_string(i) + " and " + std::to_string(j) + ")");
            }
        }
    }
    bbox_.lat_min = bbox_.lat_max = ring_.front().lat;
    bbox_.lng_min = bbox_.lng_max = ring_.front().lng;
    for (const auto& p : ring_) {
        bbox_.lat_min = std::min(bbox_.lat_min, p.lat);
        bbox_.lat_max = std::max(bbox_.lat_max, p.lat);
        bbox_.lng_min = std::min(bbox_.lng_min, p.lng);
        bbox_.lng_max = std::max(bbox_.lng_max, p.lng);
    }
}

bool point_in_polygon(const GeoPoint& p, const Polygon& poly) {
    if (!poly.bbox().contains(p)) return false;
    const auto& v = poly.ring();
    const std::size_t m = v.size() - 1;
    bool inside = false;
    for (std::size_t i = 0; i < m; ++i) {
        const GeoPoint& a = v[i];
        const GeoPoint& b = v[i + 1];
        if (point_on_segment(p, a, b)) return true;
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = a.lng + (p.lat - a.lat) / (b.lat - a.lat) * (b.lng - a.lng);
            if (p.lng < x) inside = !inside;
        }
    }
    return inside;
}

std::vector<GeoPoint> box_corners_ring(const BoundingBox& box) {
    return {{box.lat_min, box.lng_min},
            {box.lat_min, box.lng_max},
            {box.lat_max, box.lng_max},
            {box.lat_max, box.lng_min},
            {box.lat_min, box.lng_min}};
}

bool box_intersects_polygon(const BoundingBox& box, const Polygon& poly) {
    if (!box.overlaps(poly.bbox())) return false;
    const auto& v = poly.ring();
    const std::size_t m = v.size() - 1;
    for (std::size_t i = 0; i < m; ++i)
        if (box.contains(v[i])) return true;
    const auto corners = box_corners_ring(box);
    for (std::size_t i = 0; i < 4; ++i)
        if (point_in_polygon(corners[i], poly)) return true;
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < m; ++i)
            if (segments_intersect(corners[c], corners[c + 1], v[i], v[i + 1])) return true;
    return false;
}

bool box_within_polygon(const BoundingBox& box, const Polygon& poly) {
    if (!box.within(poly.bbox())) return false;
    const auto corners = box_corners_ring(box);
    for (std::size_t i = 0; i < 4; ++i)
        if (!point_in_polygon(corners[i], poly)) return false;
    const auto& v = poly.ring();
    const std::size_t m = v.size() - 1;
    for (std::size_t c = 0; c < 4; ++c)
        for (std::size_t i = 0; i < m; ++i)
            if (segments_intersect(corners[c], corners[c + 1], v[i], v[i + 1])) return false;
    return true;
}

bool polygon_within_polygon(const Polygon& inner, const Polygon& outer) {
    if (!inner.bbox().within(outer.bbox())) return false;
    const auto& vi = inner.ring();
    const auto& vo = outer.ring();
    const std::size_t mi = vi.size() - 1;
    const std::size_t mo = vo.size() - 1;
    for (std::size_t i = 0; i < mi; ++i)
        if (!point_in_polygon(vi[i], outer)) return false;
    for (std::size_t i = 0; i < mi; ++i)
        for (std::size_t j = 0; j < mo; ++j)
            if (segments_intersect(vi[i], vi[i + 1], vo[j], vo[j + 1])) return false;
    return true;
}

BoundingBox polygon_bbox(const Polygon& poly) { return poly.bbox(); }

}  // namespace streetx
