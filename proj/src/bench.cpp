#include "streetx/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace streetx {

BoundingBox BenchConfig::area_box() const {
    const double half_lat = area_km / 2.0 / kKmPerDegreeLat;
    const double half_lng = area_km / 2.0 / (kKmPerDegreeLat * std::cos(center.lat * M_PI / 180.0));
    return {center.lat - half_lat, center.lat + half_lat, center.lng - half_lng,
            center.lng + half_lng};
}

void bench_generate(const BenchConfig& cfg, const std::string& data_dir) {
    Store store{data_dir};
    store.ensure_user(cfg.owner);
    store.ensure_user(cfg.user);
    if (!store.has_stream(cfg.stream_id))
        store.create_stream(cfg.owner, cfg.stream_id, "synthetic benchmark stream");
    const BoundingBox area = cfg.area_box();
    const std::int64_t span_seconds = std::int64_t{cfg.span_days} * kSecondsPerDay;
    SplitMix64 rng(cfg.seed);
    std::vector<DataRecord> batch;
    constexpr std::size_t kBatch = 100'000;
    batch.reserve(kBatch);
    std::uint64_t remaining = cfg.record_count;
    while (remaining > 0) {
        batch.clear();
        const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kBatch, remaining));
        for (std::size_t i = 0; i < n; ++i) {
            DataRecord rec;
            rec.lat = rng.uniform(area.lat_min, area.lat_max);
            rec.lng = rng.uniform(area.lng_min, area.lng_max);
            rec.timestamp = cfg.span_start + static_cast<std::int64_t>(rng.uniform01() *
                                                                       double(span_seconds));
            rec.value = rng.uniform01();
            batch.push_back(rec);
        }
        store.ingest(cfg.owner, cfg.stream_id, batch);
        remaining -= n;
    }
}

Polygon load_region_polygon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open region file '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    const nlohmann::json* geom = &j;
    if (j.value("type", "") == "FeatureCollection") {
        const auto& features = j.at("features");
        if (features.empty()) throw std::runtime_error("region FeatureCollection is empty");
        geom = &features.at(0).at("geometry");
    } else if (j.value("type", "") == "Feature") {
        geom = &j.at("geometry");
    }
    if (geom->value("type", "") != "Polygon")
        throw std::runtime_error("region geometry must be a GeoJSON Polygon");
    const auto& rings = geom->at("coordinates");
    if (rings.size() != 1)
        throw std::runtime_error("region polygon must have exactly one (exterior) ring");
    std::vector<GeoPoint> pts;
    for (const auto& v : rings.at(0)) pts.push_back({v.at(1).get<double>(), v.at(0).get<double>()});
    return Polygon(std::move(pts));
}

Polygon subsample_region(const Polygon& region, std::size_t target, std::uint64_t seed,
                         int max_attempts) {
    const std::size_t n = region.vertex_count();
    if (target < 4 || target > n)
        throw std::invalid_argument("subsample target must be within [4, " + std::to_string(n) +
                                    "]");
    if (target == n) return region;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        SplitMix64 rng(seed + static_cast<std::uint64_t>(attempt));
        // Choose `target` distinct vertex indices, order-preserving.
        std::vector<std::uint32_t> indices(n);
        for (std::uint32_t i = 0; i < n; ++i) indices[i] = i;
        for (std::size_t i = 0; i < target; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
            std::swap(indices[i], indices[j]);
        }
        indices.resize(target);
        std::sort(indices.begin(), indices.end());
        std::vector<GeoPoint> ring;
        ring.reserve(target + 1);
        for (std::uint32_t i : indices) ring.push_back(region.ring()[i]);
        ring.push_back(ring.front());
        try {
            return Polygon(std::move(ring));
        } catch (const std::invalid_argument&) {
            // subsampled ring was not simple; retry with the next seed
        }
    }
    throw std::runtime_error("could not subsample the region to a simple ring within " +
                             std::to_string(max_attempts) + " attempts");
}

double polygon_area(const Polygon& poly) {
    const auto& v = poly.ring();
    double twice = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        twice += v[i].lng * v[i + 1].lat - v[i + 1].lng * v[i].lat;
    return std::abs(twice) / 2.0;
}

namespace {

GeoPoint vertex_centroid(const Polygon& poly) {
    double lat = 0.0, lng = 0.0;
    const std::size_t n = poly.vertex_count();
    for (std::size_t i = 0; i < n; ++i) {
        lat += poly.ring()[i].lat;
        lng += poly.ring()[i].lng;
    }
    return {lat / double(n), lng / double(n)};
}

nlohmann::json polygon_keyword_json(const std::string& name, const Polygon& poly) {
    nlohmann::json ring = nlohmann::json::array();
    for (const auto& p : poly.ring()) ring.push_back({{"lat", p.lat}, {"lng", p.lng}});
    return {{"Name", name}, {"Type", "Where"}, {"Polygon", std::move(ring)}};
}

// The deny box: centred on the region's vertex centroid, sized to the
// configured fraction of the region envelope.
Polygon home_box_polygon(const Polygon& region, double fraction) {
    const BoundingBox bb = region.bbox();
    const GeoPoint c = vertex_centroid(region);
    const double scale = std::sqrt(fraction);
    const double half_lat = (bb.lat_max - bb.lat_min) * scale / 2.0;
    const double half_lng = (bb.lng_max - bb.lng_min) * scale / 2.0;
    return Polygon({{c.lat - half_lat, c.lng - half_lng},
                    {c.lat - half_lat, c.lng + half_lng},
                    {c.lat + half_lat, c.lng + half_lng},
                    {c.lat + half_lat, c.lng - half_lng},
                    {c.lat - half_lat, c.lng - half_lng}});
}

void install_benchmark_policy(Engine& engine, const BenchConfig& cfg) {
    Polygon region = load_region_polygon(cfg.region_file);
    if (cfg.subsample > 0) region = subsample_region(region, cfg.subsample, cfg.seed);
    const Polygon home = home_box_polygon(region, cfg.home_fraction);
    engine.define_keyword(cfg.owner, polygon_keyword_json("LA", region));
    engine.define_keyword(cfg.owner, polygon_keyword_json("HOME", home));
    const std::string text =
        "What(" + cfg.stream_id + ").Where(LA, NOT HOME).Whom(" + cfg.user + ")";
    for (const auto& info : engine.policies()) {
        if (info.owner == cfg.owner && info.text == text) return;  // keywords refreshed above
    }
    engine.create_policy(cfg.owner, text);
}

}  // namespace

ModeStats bench_run(const BenchConfig& cfg, const std::string& data_dir, char mode) {
    if (mode != 'd' && mode != 'a' && mode != 'b')
        throw std::invalid_argument("benchmark mode must be d, a, or b");
    Store store{data_dir};
    if (!store.has_stream(cfg.stream_id))
        throw std::runtime_error("no benchmark dataset at '" + data_dir +
                                 "'; run `bench generate` first");
    if (mode != 'd') {
        // Policy installation uses a fully-featured engine; the measured
        // engine below carries the mode's optimizer/cache settings.
        Engine setup(store);
        install_benchmark_policy(setup, cfg);
    }
    Engine::Options options;
    options.optimizer_enabled = (mode == 'b');
    options.constraint_cache_enabled = (mode == 'b');
    Engine engine(store, options);
    const std::string query_user = mode == 'd' ? cfg.owner : cfg.user;

    const BoundingBox area = cfg.area_box();
    const double half_lat = cfg.query_km / 2.0 / kKmPerDegreeLat;
    const double half_lng =
        cfg.query_km / 2.0 / (kKmPerDegreeLat * std::cos(cfg.center.lat * M_PI / 180.0));
    const std::int64_t query_seconds = std::int64_t{cfg.query_days} * kSecondsPerDay;
    const std::int64_t span_seconds = std::int64_t{cfg.span_days} * kSecondsPerDay;

    ModeStats stats;
    stats.mode = mode;
    stats.queries = static_cast<std::uint64_t>(cfg.query_count);
    SplitMix64 rng(cfg.seed ^ 0xa5a5a5a5a5a5a5a5ULL);  // query stream, distinct from data
    double total_ms = 0.0;
    std::uint64_t total_points = 0;
    for (int q = 0; q < cfg.query_count; ++q) {
        QueryRequest req;
        req.user_id = query_user;
        req.stream_ids = {cfg.stream_id};
        const double clat = rng.uniform(area.lat_min + half_lat, area.lat_max - half_lat);
        const double clng = rng.uniform(area.lng_min + half_lng, area.lng_max - half_lng);
        req.space_box = {clat - half_lat, clat + half_lat, clng - half_lng, clng + half_lng};
        const std::int64_t t0 =
            cfg.span_start +
            static_cast<std::int64_t>(rng.uniform01() * double(span_seconds - query_seconds));
        req.time_range = {t0, t0 + query_seconds};

        const auto begin = std::chrono::steady_clock::now();
        const QueryResponse resp = engine.handle_query(req);
        const double ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - begin)
                              .count();
        const StreamResult& r = resp.results.at(0);
        const bool rejected = r.status == "rejected-by-policy";
        stats.per_query_points.push_back(r.count);
        stats.per_query_ms.push_back(ms);
        stats.per_query_rejected.push_back(rejected);
        if (rejected) ++stats.rejected;
        total_ms += ms;
        total_points += r.count;
    }
    stats.mean_points = double(total_points) / double(cfg.query_count);
    stats.mean_latency_ms = total_ms / double(cfg.query_count);
    return stats;
}

nlohmann::json bench_report_to_json(const BenchReport& report) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : report.modes) {
        modes.push_back({{"mode", std::string(1, m.mode)},
                         {"queries", m.queries},
                         {"rejected", m.rejected},
                         {"meanPoints", m.mean_points},
                         {"meanLatencyMs", m.mean_latency_ms},
                         {"perQueryPoints", m.per_query_points},
                         {"perQueryMs", m.per_query_ms},
                         {"perQueryRejected", m.per_query_rejected}});
    }
    const auto& c = report.config;
    return {{"config",
             {{"records", c.record_count},
              {"seed", c.seed},
              {"areaKm", c.area_km},
              {"spanDays", c.span_days},
              {"queryKm", c.query_km},
              {"queryDays", c.query_days},
              {"queries", c.query_count},
              {"regionFile", c.region_file},
              {"subsample", c.subsample},
              {"homeFraction", c.home_fraction}}},
            {"modes", std::move(modes)}};
}

std::string bench_report_table(const BenchReport& report) {
    std::ostringstream out;
    auto dataset = [&] {
        const double m = double(report.config.record_count) / 1e6;
        std::ostringstream s;
        s << m << " Million";
        return s.str();
    }();
    out << "| Dataset    | Query   | No. of points | Time (ms) |\n";
    out << "|------------|---------|---------------|-----------|\n";
    for (const auto& m : report.modes) {
        std::ostringstream points, latency;
        points.precision(1);
        points << std::fixed << m.mean_points;
        latency.precision(3);
        latency << std::fixed << m.mean_latency_ms;
        out << "| " << dataset << " | Query_" << m.mode << " | " << points.str() << " | "
            << latency.str() << " |\n";
    }
    return out.str();
}

}  // namespace streetx
