#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "streetx/geometry.hpp"
#include "streetx/service.hpp"

#include <nlohmann/json_fwd.hpp>

namespace streetx {

// Deterministic RNG for reproducible datasets and workloads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }

private:
    std::uint64_t state_;
};

inline constexpr double kKmPerDegreeLat = 111.32;

struct BenchConfig {
    std::uint64_t record_count = 1'000'000;  // desk default; the paper ran 10M
    std::uint64_t seed = 42;
    double area_km = 500.0;
    int span_days = 365;
    std::int64_t span_start = 1388534400;  // 2014-01-01T00:00Z
    GeoPoint center{34.05, -118.25};
    double query_km = 50.0;
    int query_days = 14;
    int query_count = 1000;
    std::string region_file;     // GeoJSON polygon for the allow region
    std::size_t subsample = 0;   // 0 keeps the full region
    double home_fraction = 0.01; // deny box area, as a fraction of the region envelope

    std::string stream_id = "bench";
    std::string owner = "alice";
    std::string user = "bob";

    BoundingBox area_box() const;
};

struct ModeStats {
    char mode = 'd';
    std::uint64_t queries = 0;
    std::uint64_t rejected = 0;
    double mean_points = 0.0;
    double mean_latency_ms = 0.0;
    std::vector<std::uint64_t> per_query_points;
    std::vector<double> per_query_ms;
    std::vector<bool> per_query_rejected;
};

struct BenchReport {
    BenchConfig config;
    std::vector<ModeStats> modes;
};

nlohmann::json bench_report_to_json(const BenchReport& report);
// The Table-4 style summary: Dataset | Query | No. of points | Time (ms).
std::string bench_report_table(const BenchReport& report);

// Populates a fresh store at `data_dir` with uniform-random records over the
// configured area and time span. Deterministic for a fixed seed.
void bench_generate(const BenchConfig& cfg, const std::string& data_dir);

// Loads a GeoJSON Polygon (bare geometry, Feature, or FeatureCollection with
// one polygon feature).
Polygon load_region_polygon(const std::string& path);

// Seeded random vertex subset preserving order and ring closure; retries
// until the subsampled ring is simple. Throws when `target` is out of range
// or no simple ring is found within the retry cap.
Polygon subsample_region(const Polygon& region, std::size_t target, std::uint64_t seed,
                         int max_attempts = 64);

// Shoelace area of the ring, in the ring's coordinate units.
double polygon_area(const Polygon& poly);

// Installs (or refreshes) the benchmark policy for modes a/b and runs the
// workload. Mode d queries as the owner, a applies the policy uncached and
// ungated, b applies it with the optimizer.
ModeStats bench_run(const BenchConfig& cfg, const std::string& data_dir, char mode);

}  // namespace streetx
