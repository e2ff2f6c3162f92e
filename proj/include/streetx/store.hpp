#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "streetx/geometry.hpp"
#include "streetx/policy_lang.hpp"
#include "streetx/temporal.hpp"

#include <nlohmann/json_fwd.hpp>

namespace streetx {

struct DataRecord {
    double lat = 0.0;
    double lng = 0.0;
    std::int64_t timestamp = 0;
    double value = 0.0;
    friend bool operator==(const DataRecord&, const DataRecord&) = default;
};

// Record plus its index in the source stream; replica rows keep the source
// index so results from different resolution replicas can be reconciled.
struct RecordRow {
    DataRecord rec;
    std::uint64_t source_index = 0;
};

struct IngestReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<std::string> reasons;  // one entry per rejected record
};

struct ResolutionSpec {
    enum class Dimension { Time, Space };
    Dimension dimension = Dimension::Time;
    TimeBucket bucket = TimeBucket::Hour;  // when dimension == Time
    std::string boundary_set;              // when dimension == Space
    friend bool operator==(const ResolutionSpec&, const ResolutionSpec&) = default;

    std::string key() const;  // stable identifier, e.g. "time:Hour" / "space:County"
    std::string display() const;
};

struct StreamMeta {
    std::string id;
    std::string owner;
    std::string description;
    std::uint64_t count = 0;
    std::int64_t t_min = 0;  // valid when count > 0
    std::int64_t t_max = 0;
    BoundingBox envelope;    // valid when count > 0
    bool hidden = false;     // resolution replicas are hidden
    std::string source_stream;                    // set on replicas
    std::optional<ResolutionSpec> resolution;     // set on replicas
    std::map<std::string, std::string> replicas;  // resolution key -> replica stream id

    // Full metadata span as a half-open window [t_min, t_max + 1); empty when
    // the stream has no records.
    IntervalSet full_span() const {
        return count == 0 ? IntervalSet{} : IntervalSet::single(t_min, t_max + 1);
    }
};

struct BoundaryRegion {
    std::string id;
    Polygon polygon;
    GeoPoint representative;
};

struct BoundarySet {
    std::string name;
    std::vector<BoundaryRegion> regions;
};

// Parses a GeoJSON FeatureCollection of single-ring Polygon features; each
// feature needs an "id" (top-level or in properties). Representative points
// are computed, guaranteed inside their region.
BoundarySet boundary_set_from_geojson(const std::string& name, const nlohmann::json& geojson);

// A point strictly usable as the region's stand-in: inside the polygon.
GeoPoint representative_point(const Polygon& poly);

std::int64_t time_bucket_start(std::int64_t t, TimeBucket bucket);

struct CoarsenResult {
    std::string replica_id;
    std::uint64_t coarsened = 0;
    std::uint64_t dropped = 0;  // space coarsening only: records in no region
};

struct StoreError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFoundError : StoreError {
    using StoreError::StoreError;
};
struct ForbiddenError : StoreError {
    using StoreError::StoreError;
};

/// Embedded persistent stream store.
///
/// Layout under the data directory: `catalog.json` (users, stream metadata,
/// boundary sets, and an opaque application-state blob) plus one append-only
/// binary log per stream under `streams/`. Indexes are in-memory uniform
/// grids with time-sorted cell lists, rebuilt from the logs on open.
/// Concurrency: per-stream reader/writer locking — many concurrent readers,
/// one writer, queries always see whole batches.
class Store {
public:
    explicit Store(std::filesystem::path data_dir);
    ~Store();

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    // --- principals ------------------------------------------------------
    void ensure_user(const std::string& user_id);
    bool has_user(const std::string& user_id) const;
    std::vector<std::string> users() const;

    // --- streams ---------------------------------------------------------
    StreamMeta create_stream(const std::string& owner, const std::string& stream_id,
                             const std::string& description);
    StreamMeta meta(const std::string& stream_id) const;  // throws NotFoundError
    bool has_stream(const std::string& stream_id) const;
    std::vector<StreamMeta> list_streams() const;

    // Owner-checked ingest; invalid records are reported and skipped while
    // the rest of the batch proceeds. Replica streams update synchronously.
    IngestReport ingest(const std::string& caller, const std::string& stream_id,
                        std::span<const DataRecord> batch);

    // Records with point inside `box` (inclusive bounds) and timestamp in
    // [range.start, range.end). Hidden replicas are not directly queryable.
    std::vector<DataRecord> range_query(const std::string& stream_id, const BoundingBox& box,
                                        const TimeWindow& range) const;
    // Internal variant used by the policy evaluator: may target hidden
    // replicas and returns rows carrying source indices.
    std::vector<RecordRow> range_query_rows(const std::string& stream_id, const BoundingBox& box,
                                            const TimeWindow& range) const;

    // Creates (or returns) the resolution replica of a stream.
    CoarsenResult coarsen_stream(const std::string& stream_id, const ResolutionSpec& spec);

    // --- boundary sets ----------------------------------------------------
    void register_boundary_set(BoundarySet set);
    std::shared_ptr<const BoundarySet> boundary_set(const std::string& name) const;

    // --- application state (policies, keywords) ---------------------------
    nlohmann::json app_state() const;
    void set_app_state(nlohmann::json state);

    // --- instrumentation ---------------------------------------------------
    std::uint64_t index_accesses() const { return index_accesses_.load(); }
    // Records examined by the last index probe on this thread-free counter;
    // used by tests asserting the sub-linear fetch contract.
    std::uint64_t candidates_examined() const { return candidates_examined_.load(); }

    const std::filesystem::path& data_dir() const { return dir_; }

private:
    struct GridIndex;
    struct StreamState;

    StreamState& state(const std::string& stream_id);
    const StreamState& state(const std::string& stream_id) const;
    std::vector<RecordRow> query_locked(StreamState& st, const BoundingBox& box,
                                        const TimeWindow& range) const;
    void append_rows(StreamState& st, const std::vector<RecordRow>& rows);
    RecordRow coarsen_row(const RecordRow& row, const ResolutionSpec& spec,
                          const BoundarySet* boundaries, bool& dropped) const;
    void save_catalog() const;
    void load();

    std::filesystem::path dir_;
    mutable std::mutex catalog_mu_;
    std::vector<std::string> users_;
    mutable std::shared_mutex streams_mu_;  // guards the map structure only
    std::map<std::string, std::unique_ptr<StreamState>> streams_;
    std::map<std::string, std::shared_ptr<const BoundarySet>> boundary_sets_;
    std::unique_ptr<nlohmann::json> app_state_;
    mutable std::atomic<std::uint64_t> index_accesses_{0};
    mutable std::atomic<std::uint64_t> candidates_examined_{0};
};

}  // namespace streetx
