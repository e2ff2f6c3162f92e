#include "streetx/store.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace streetx {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Resolution buckets

std::string ResolutionSpec::key() const {
    if (dimension == Dimension::Time) return std::string("time:") + bucket_name(bucket);
    return "space:" + boundary_set;
}

std::string ResolutionSpec::display() const {
    return dimension == Dimension::Time ? bucket_name(bucket) : boundary_set;
}

std::int64_t time_bucket_start(std::int64_t t, TimeBucket bucket) {
    switch (bucket) {
        case TimeBucket::Second:
            return t;
        case TimeBucket::Minute:
        case TimeBucket::Hour:
        case TimeBucket::Day:
            return floor_div(t, bucket_seconds(bucket)) * bucket_seconds(bucket);
        case TimeBucket::Week: {
            // Weeks start Monday 00:00 UTC.
            const std::int64_t day = floor_div(t, kSecondsPerDay);
            const unsigned wd = weekday_of_unix_day(day);  // 0 = Sunday
            const std::int64_t days_from_monday = (wd + 6) % 7;
            return (day - days_from_monday) * kSecondsPerDay;
        }
        case TimeBucket::Month:
        case TimeBucket::Year: {
            const std::int64_t day = floor_div(t, kSecondsPerDay);
            const std::chrono::year_month_day ymd{
                std::chrono::sys_days{std::chrono::days{day}}};
            const std::chrono::year_month_day bucket_start =
                bucket == TimeBucket::Month
                    ? std::chrono::year_month_day{ymd.year(), ymd.month(), std::chrono::day{1}}
                    : std::chrono::year_month_day{ymd.year(), std::chrono::month{1},
                                                  std::chrono::day{1}};
            return std::chrono::sys_days{bucket_start}.time_since_epoch().count() * kSecondsPerDay;
        }
    }
    throw std::invalid_argument("unknown time bucket");
}

// ---------------------------------------------------------------------------
// Boundary sets

GeoPoint representative_point(const Polygon& poly) {
    const BoundingBox& bb = poly.bbox();
    const auto& ring = poly.ring();
    const std::size_t m = ring.size() - 1;
    // Sweep a few horizontal scanlines; the midpoint of the first interior
    // span is the representative.
    for (int k = 1; k <= 64; ++k) {
        const double lat = bb.lat_min + (bb.lat_max - bb.lat_min) * k / 65.0;
        std::vector<double> crossings;
        for (std::size_t i = 0; i < m; ++i) {
            const GeoPoint& a = ring[i];
            const GeoPoint& b = ring[i + 1];
            if ((a.lat > lat) != (b.lat > lat))
                crossings.push_back(a.lng + (lat - a.lat) / (b.lat - a.lat) * (b.lng - a.lng));
        }
        std::sort(crossings.begin(), crossings.end());
        for (std::size_t i = 0; i + 1 < crossings.size(); i += 2) {
            const GeoPoint mid{lat, (crossings[i] + crossings[i + 1]) / 2.0};
            if (point_in_polygon(mid, poly)) return mid;
        }
    }
    throw std::invalid_argument("could not find an interior representative point");
}

BoundarySet boundary_set_from_geojson(const std::string& name, const nlohmann::json& geojson) {
    if (geojson.value("type", "") != "FeatureCollection")
        throw std::invalid_argument("boundary set must be a GeoJSON FeatureCollection");
    BoundarySet set;
    set.name = name;
    for (const auto& feature : geojson.at("features")) {
        std::string id;
        if (feature.contains("id"))
            id = feature.at("id").is_string() ? feature.at("id").get<std::string>()
                                              : feature.at("id").dump();
        else if (feature.contains("properties") && feature.at("properties").contains("id")) {
            const auto& p = feature.at("properties").at("id");
            id = p.is_string() ? p.get<std::string>() : p.dump();
        } else {
            throw std::invalid_argument("boundary feature lacks an \"id\" property");
        }
        const auto& geom = feature.at("geometry");
        if (geom.value("type", "") != "Polygon")
            throw std::invalid_argument("boundary feature '" + id + "' must be a Polygon");
        const auto& coords = geom.at("coordinates");
        if (coords.size() != 1)
            throw std::invalid_argument("boundary feature '" + id +
                                        "' must have exactly one (exterior) ring");
        std::vector<GeoPoint> pts;
        for (const auto& v : coords.at(0))
            pts.push_back({v.at(1).get<double>(), v.at(0).get<double>()});
        Polygon poly(std::move(pts));
        GeoPoint rep = representative_point(poly);
        set.regions.push_back({id, std::move(poly), rep});
    }
    if (set.regions.empty()) throw std::invalid_argument("boundary set has no regions");
    return set;
}

// ---------------------------------------------------------------------------
// Grid index

struct Store::GridIndex {
    BoundingBox cover;
    int nx = 1, ny = 1;
    std::vector<std::vector<std::uint32_t>> cells;  // row indices, time-sorted

    static std::unique_ptr<GridIndex> build(const std::vector<RecordRow>& rows,
                                            const BoundingBox& envelope) {
        auto idx = std::make_unique<GridIndex>();
        idx->cover = envelope;
        const int n = static_cast<int>(
            std::clamp(std::ceil(std::sqrt(double(rows.size()) / 64.0)), 1.0, 256.0));
        idx->nx = idx->ny = n;
        idx->cells.assign(static_cast<std::size_t>(n) * n, {});
        for (std::uint32_t i = 0; i < rows.size(); ++i)
            idx->cells[idx->cell_of(rows[i].rec)].push_back(i);
        for (auto& cell : idx->cells)
            std::sort(cell.begin(), cell.end(), [&](std::uint32_t a, std::uint32_t b) {
                return rows[a].rec.timestamp < rows[b].rec.timestamp;
            });
        return idx;
    }

    int clamp_x(double lng) const {
        const double w = cover.lng_max - cover.lng_min;
        if (w <= 0.0) return 0;
        return std::clamp(static_cast<int>((lng - cover.lng_min) / w * nx), 0, nx - 1);
    }
    int clamp_y(double lat) const {
        const double h = cover.lat_max - cover.lat_min;
        if (h <= 0.0) return 0;
        return std::clamp(static_cast<int>((lat - cover.lat_min) / h * ny), 0, ny - 1);
    }
    std::size_t cell_of(const DataRecord& r) const {
        return static_cast<std::size_t>(clamp_y(r.lat)) * nx + clamp_x(r.lng);
    }

    void insert(const std::vector<RecordRow>& rows, std::uint32_t i) {
        auto& cell = cells[cell_of(rows[i].rec)];
        // keep the cell time-sorted
        const auto it = std::upper_bound(cell.begin(), cell.end(), i,
                                         [&](std::uint32_t a, std::uint32_t b) {
                                             return rows[a].rec.timestamp < rows[b].rec.timestamp;
                                         });
        cell.insert(it, i);
    }

    bool covers(const BoundingBox& env) const { return env.within(cover); }
};

// ---------------------------------------------------------------------------
// Stream state

struct Store::StreamState {
    StreamMeta meta;
    std::vector<RecordRow> rows;
    std::unique_ptr<GridIndex> index;
    mutable std::shared_mutex mu;
    std::ofstream log;
};

namespace {

constexpr std::size_t kRowBytes = 8 + 8 + 8 + 8 + 8;  // src, lat, lng, ts, value

void encode_row(const RecordRow& row, char* out) {
    std::memcpy(out, &row.source_index, 8);
    std::memcpy(out + 8, &row.rec.lat, 8);
    std::memcpy(out + 16, &row.rec.lng, 8);
    std::memcpy(out + 24, &row.rec.timestamp, 8);
    std::memcpy(out + 32, &row.rec.value, 8);
}

RecordRow decode_row(const char* in) {
    RecordRow row;
    std::memcpy(&row.source_index, in, 8);
    std::memcpy(&row.rec.lat, in + 8, 8);
    std::memcpy(&row.rec.lng, in + 16, 8);
    std::memcpy(&row.rec.timestamp, in + 24, 8);
    std::memcpy(&row.rec.value, in + 32, 8);
    return row;
}

void extend_meta(StreamMeta& meta, const DataRecord& rec) {
    if (meta.count == 0) {
        meta.t_min = meta.t_max = rec.timestamp;
        meta.envelope = {rec.lat, rec.lat, rec.lng, rec.lng};
    } else {
        meta.t_min = std::min(meta.t_min, rec.timestamp);
        meta.t_max = std::max(meta.t_max, rec.timestamp);
        meta.envelope.lat_min = std::min(meta.envelope.lat_min, rec.lat);
        meta.envelope.lat_max = std::max(meta.envelope.lat_max, rec.lat);
        meta.envelope.lng_min = std::min(meta.envelope.lng_min, rec.lng);
        meta.envelope.lng_max = std::max(meta.envelope.lng_max, rec.lng);
    }
    ++meta.count;
}

std::string validate_record(const DataRecord& rec) {
    if (!std::isfinite(rec.lat) || rec.lat < -90.0 || rec.lat > 90.0)
        return "latitude out of range: " + std::to_string(rec.lat);
    if (!std::isfinite(rec.lng) || rec.lng < -180.0 || rec.lng > 180.0)
        return "longitude out of range: " + std::to_string(rec.lng);
    if (rec.timestamp < 0) return "timestamp must be non-negative";
    if (!std::isfinite(rec.value)) return "value must be finite";
    return {};
}

fs::path stream_log_path(const fs::path& dir, const std::string& stream_id) {
    // stream ids may contain ':' (replica ids); keep filenames tame
    std::string name = stream_id;
    for (char& c : name)
        if (c == '/' || c == ':') c = '_';
    return dir / "streams" / (name + ".log");
}

}  // namespace

// ---------------------------------------------------------------------------
// Store

Store::Store(fs::path data_dir) : dir_(std::move(data_dir)) {
    fs::create_directories(dir_ / "streams");
    app_state_ = std::make_unique<nlohmann::json>(nlohmann::json::object());
    load();
}

Store::~Store() = default;

void Store::load() {
    const fs::path catalog = dir_ / "catalog.json";
    if (fs::exists(catalog)) {
        std::ifstream in(catalog);
        nlohmann::json j = nlohmann::json::parse(in);
        users_ = j.value("users", std::vector<std::string>{});
        for (const auto& s : j.value("streams", nlohmann::json::array())) {
            auto st = std::make_unique<StreamState>();
            st->meta.id = s.at("id").get<std::string>();
            st->meta.owner = s.at("owner").get<std::string>();
            st->meta.description = s.value("description", "");
            st->meta.hidden = s.value("hidden", false);
            st->meta.source_stream = s.value("source", "");
            if (s.contains("resolution") && !s.at("resolution").is_null()) {
                ResolutionSpec spec;
                const auto& r = s.at("resolution");
                if (r.at("dimension") == "time") {
                    spec.dimension = ResolutionSpec::Dimension::Time;
                    spec.bucket = *parse_time_bucket(r.at("bucket").get<std::string>());
                } else {
                    spec.dimension = ResolutionSpec::Dimension::Space;
                    spec.boundary_set = r.at("boundarySet").get<std::string>();
                }
                st->meta.resolution = spec;
            }
            if (s.contains("replicas"))
                st->meta.replicas =
                    s.at("replicas").get<std::map<std::string, std::string>>();
            streams_[st->meta.id] = std::move(st);
        }
        for (const auto& b : j.value("boundarySets", nlohmann::json::array())) {
            auto set = std::make_shared<BoundarySet>();
            set->name = b.at("name").get<std::string>();
            for (const auto& r : b.at("regions")) {
                std::vector<GeoPoint> pts;
                for (const auto& v : r.at("ring"))
                    pts.push_back({v.at(1).get<double>(), v.at(0).get<double>()});
                Polygon poly(std::move(pts));
                set->regions.push_back(
                    {r.at("id").get<std::string>(), std::move(poly),
                     GeoPoint{r.at("rep").at(1).get<double>(), r.at("rep").at(0).get<double>()}});
            }
            boundary_sets_[set->name] = std::move(set);
        }
        if (j.contains("app")) *app_state_ = j.at("app");
    }
    // Replay record logs and build the indexes.
    for (auto& [id, st] : streams_) {
        const fs::path path = stream_log_path(dir_, id);
        if (fs::exists(path)) {
            std::ifstream in(path, std::ios::binary);
            char buf[kRowBytes];
            while (in.read(buf, kRowBytes)) {
                RecordRow row = decode_row(buf);
                extend_meta(st->meta, row.rec);
                st->rows.push_back(row);
            }
        }
        st->log.open(path, std::ios::binary | std::ios::app);
        st->index = GridIndex::build(st->rows, st->meta.envelope);
    }
}

void Store::save_catalog() const {
    nlohmann::json j;
    j["users"] = users_;
    nlohmann::json streams = nlohmann::json::array();
    for (const auto& [id, st] : streams_) {
        nlohmann::json s{{"id", st->meta.id},
                         {"owner", st->meta.owner},
                         {"description", st->meta.description},
                         {"hidden", st->meta.hidden},
                         {"source", st->meta.source_stream},
                         {"replicas", st->meta.replicas}};
        if (st->meta.resolution) {
            const auto& r = *st->meta.resolution;
            if (r.dimension == ResolutionSpec::Dimension::Time)
                s["resolution"] = {{"dimension", "time"}, {"bucket", bucket_name(r.bucket)}};
            else
                s["resolution"] = {{"dimension", "space"}, {"boundarySet", r.boundary_set}};
        } else {
            s["resolution"] = nullptr;
        }
        streams.push_back(std::move(s));
    }
    j["streams"] = std::move(streams);
    nlohmann::json bsets = nlohmann::json::array();
    for (const auto& [name, set] : boundary_sets_) {
        nlohmann::json regions = nlohmann::json::array();
        for (const auto& r : set->regions) {
            nlohmann::json ring = nlohmann::json::array();
            for (const auto& p : r.polygon.ring()) ring.push_back({p.lng, p.lat});
            regions.push_back({{"id", r.id},
                               {"ring", std::move(ring)},
                               {"rep", {r.representative.lng, r.representative.lat}}});
        }
        bsets.push_back({{"name", name}, {"regions", std::move(regions)}});
    }
    j["boundarySets"] = std::move(bsets);
    j["app"] = *app_state_;
    const fs::path tmp = dir_ / "catalog.json.tmp";
    {
        std::ofstream out(tmp);
        out << j.dump(2);
    }
    fs::rename(tmp, dir_ / "catalog.json");
}

void Store::ensure_user(const std::string& user_id) {
    std::lock_guard lock(catalog_mu_);
    if (std::find(users_.begin(), users_.end(), user_id) == users_.end()) {
        users_.push_back(user_id);
        save_catalog();
    }
}

bool Store::has_user(const std::string& user_id) const {
    std::lock_guard lock(catalog_mu_);
    return std::find(users_.begin(), users_.end(), user_id) != users_.end();
}

std::vector<std::string> Store::users() const {
    std::lock_guard lock(catalog_mu_);
    return users_;
}

Store::StreamState& Store::state(const std::string& stream_id) {
    std::shared_lock lock(streams_mu_);
    auto it = streams_.find(stream_id);
    if (it == streams_.end()) throw NotFoundError("unknown stream '" + stream_id + "'");
    return *it->second;  // map nodes are stable; streams are never removed
}

const Store::StreamState& Store::state(const std::string& stream_id) const {
    std::shared_lock lock(streams_mu_);
    auto it = streams_.find(stream_id);
    if (it == streams_.end()) throw NotFoundError("unknown stream '" + stream_id + "'");
    return *it->second;
}

StreamMeta Store::create_stream(const std::string& owner, const std::string& stream_id,
                                const std::string& description) {
    std::lock_guard lock(catalog_mu_);
    if (std::find(users_.begin(), users_.end(), owner) == users_.end())
        throw NotFoundError("unknown owner '" + owner + "'");
    if (streams_.count(stream_id))
        throw StoreError("stream id '" + stream_id + "' already exists");
    if (stream_id.empty()) throw StoreError("stream id must be non-empty");
    auto st = std::make_unique<StreamState>();
    st->meta.id = stream_id;
    st->meta.owner = owner;
    st->meta.description = description;
    st->log.open(stream_log_path(dir_, stream_id), std::ios::binary | std::ios::app);
    st->index = GridIndex::build(st->rows, st->meta.envelope);
    StreamMeta meta = st->meta;
    {
        std::unique_lock map_lock(streams_mu_);
        streams_[stream_id] = std::move(st);
    }
    save_catalog();
    return meta;
}

StreamMeta Store::meta(const std::string& stream_id) const {
    const StreamState& st = state(stream_id);
    std::shared_lock lock(st.mu);
    return st.meta;
}

bool Store::has_stream(const std::string& stream_id) const {
    std::shared_lock lock(streams_mu_);
    return streams_.count(stream_id) > 0;
}

std::vector<StreamMeta> Store::list_streams() const {
    std::shared_lock map_lock(streams_mu_);
    std::vector<StreamMeta> out;
    for (const auto& [id, st] : streams_) {
        std::shared_lock lock(st->mu);
        out.push_back(st->meta);
    }
    return out;
}

void Store::append_rows(StreamState& st, const std::vector<RecordRow>& rows) {
    std::vector<char> buf(rows.size() * kRowBytes);
    for (std::size_t i = 0; i < rows.size(); ++i) encode_row(rows[i], buf.data() + i * kRowBytes);
    st.log.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    st.log.flush();
    const std::size_t before = st.rows.size();
    for (const auto& row : rows) {
        extend_meta(st.meta, row.rec);
        st.rows.push_back(row);
    }
    // Large batches and envelope growth trigger a rebuild; small appends are
    // inserted in place to keep cells time-sorted.
    if (!st.index || !st.index->covers(st.meta.envelope) || rows.size() > before / 4)
        st.index = GridIndex::build(st.rows, st.meta.envelope);
    else
        for (std::uint32_t i = static_cast<std::uint32_t>(before); i < st.rows.size(); ++i)
            st.index->insert(st.rows, i);
}

RecordRow Store::coarsen_row(const RecordRow& row, const ResolutionSpec& spec,
                             const BoundarySet* boundaries, bool& dropped) const {
    dropped = false;
    RecordRow out = row;
    if (spec.dimension == ResolutionSpec::Dimension::Time) {
        out.rec.timestamp = time_bucket_start(row.rec.timestamp, spec.bucket);
        return out;
    }
    for (const auto& region : boundaries->regions) {
        if (region.polygon.bbox().contains({row.rec.lat, row.rec.lng}) &&
            point_in_polygon({row.rec.lat, row.rec.lng}, region.polygon)) {
            out.rec.lat = region.representative.lat;
            out.rec.lng = region.representative.lng;
            return out;
        }
    }
    dropped = true;
    return out;
}

IngestReport Store::ingest(const std::string& caller, const std::string& stream_id,
                           std::span<const DataRecord> batch) {
    StreamState& st = state(stream_id);
    {
        std::shared_lock lock(st.mu);
        if (st.meta.hidden)
            throw ForbiddenError("stream '" + stream_id + "' is a resolution replica; ingest into its source");
        if (st.meta.owner != caller)
            throw ForbiddenError("only the owner of '" + stream_id + "' may ingest records");
    }
    IngestReport report;
    std::vector<RecordRow> accepted;
    accepted.reserve(batch.size());
    {
        std::unique_lock lock(st.mu);
        std::uint64_t next = st.meta.count;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::string err = validate_record(batch[i]);
            if (!err.empty()) {
                ++report.rejected;
                report.reasons.push_back("record " + std::to_string(i) + ": " + err);
                continue;
            }
            accepted.push_back({batch[i], next++});
            ++report.accepted;
        }
        append_rows(st, accepted);
    }
    // Propagate to replicas (separate locks; replica list changes only under
    // the catalog lock, which ingest does not take).
    std::map<std::string, std::string> replicas;
    {
        std::shared_lock lock(st.mu);
        replicas = st.meta.replicas;
    }
    for (const auto& [key, replica_id] : replicas) {
        StreamState& rep = state(replica_id);
        std::unique_lock lock(rep.mu);
        const ResolutionSpec& spec = *rep.meta.resolution;
        std::shared_ptr<const BoundarySet> bset;
        if (spec.dimension == ResolutionSpec::Dimension::Space) bset = boundary_set(spec.boundary_set);
        std::vector<RecordRow> rows;
        rows.reserve(accepted.size());
        for (const auto& row : accepted) {
            bool dropped = false;
            RecordRow c = coarsen_row(row, spec, bset.get(), dropped);
            if (!dropped) rows.push_back(c);
        }
        append_rows(rep, rows);
    }
    return report;
}

std::vector<RecordRow> Store::query_locked(StreamState& st, const BoundingBox& box,
                                           const TimeWindow& range) const {
    index_accesses_.fetch_add(1, std::memory_order_relaxed);
    const GridIndex& idx = *st.index;
    std::vector<RecordRow> out;
    if (st.rows.empty()) return out;
    if (box.lng_max < idx.cover.lng_min || box.lng_min > idx.cover.lng_max ||
        box.lat_max < idx.cover.lat_min || box.lat_min > idx.cover.lat_max)
        return out;
    const int x0 = idx.clamp_x(std::max(box.lng_min, idx.cover.lng_min));
    const int x1 = idx.clamp_x(std::min(box.lng_max, idx.cover.lng_max));
    const int y0 = idx.clamp_y(std::max(box.lat_min, idx.cover.lat_min));
    const int y1 = idx.clamp_y(std::min(box.lat_max, idx.cover.lat_max));
    std::uint64_t examined = 0;
    std::vector<std::uint32_t> hits;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const auto& cell = idx.cells[static_cast<std::size_t>(y) * idx.nx + x];
            auto lo = std::lower_bound(cell.begin(), cell.end(), range.start,
                                       [&](std::uint32_t i, std::int64_t t) {
                                           return st.rows[i].rec.timestamp < t;
                                       });
            for (auto it = lo; it != cell.end(); ++it) {
                const RecordRow& row = st.rows[*it];
                if (row.rec.timestamp >= range.end) break;
                ++examined;
                if (box.contains({row.rec.lat, row.rec.lng})) hits.push_back(*it);
            }
        }
    }
    candidates_examined_.store(examined, std::memory_order_relaxed);
    std::sort(hits.begin(), hits.end());
    out.reserve(hits.size());
    for (std::uint32_t i : hits) out.push_back(st.rows[i]);
    return out;
}

std::vector<DataRecord> Store::range_query(const std::string& stream_id, const BoundingBox& box,
                                           const TimeWindow& range) const {
    validate_box(box);
    validate_window(range);
    StreamState& st = const_cast<StreamState&>(state(stream_id));
    std::shared_lock lock(st.mu);
    if (st.meta.hidden)
        throw ForbiddenError("stream '" + stream_id + "' is an internal resolution replica");
    std::vector<DataRecord> out;
    for (auto& row : query_locked(st, box, range)) out.push_back(row.rec);
    return out;
}

std::vector<RecordRow> Store::range_query_rows(const std::string& stream_id, const BoundingBox& box,
                                               const TimeWindow& range) const {
    validate_box(box);
    validate_window(range);
    StreamState& st = const_cast<StreamState&>(state(stream_id));
    std::shared_lock lock(st.mu);
    return query_locked(st, box, range);
}

CoarsenResult Store::coarsen_stream(const std::string& stream_id, const ResolutionSpec& spec) {
    StreamState& st = state(stream_id);
    std::shared_ptr<const BoundarySet> bset;
    if (spec.dimension == ResolutionSpec::Dimension::Space) {
        bset = boundary_set(spec.boundary_set);
        if (!bset) throw NotFoundError("boundary set '" + spec.boundary_set + "' is not registered");
    }
    std::lock_guard cat_lock(catalog_mu_);
    {
        std::shared_lock lock(st.mu);
        auto it = st.meta.replicas.find(spec.key());
        if (it != st.meta.replicas.end()) {
            const StreamState& rep = state(it->second);
            std::shared_lock rlock(rep.mu);
            return {it->second, rep.meta.count, 0};
        }
    }
    std::string replica_id = stream_id + "::" + spec.key();
    auto rep = std::make_unique<StreamState>();
    rep->meta.id = replica_id;
    rep->meta.owner = st.meta.owner;
    rep->meta.description = "resolution replica of " + stream_id;
    rep->meta.hidden = true;
    rep->meta.source_stream = stream_id;
    rep->meta.resolution = spec;
    rep->log.open(stream_log_path(dir_, replica_id), std::ios::binary | std::ios::app);
    CoarsenResult result;
    result.replica_id = replica_id;
    {
        std::unique_lock lock(st.mu);
        std::vector<RecordRow> rows;
        rows.reserve(st.rows.size());
        for (const auto& row : st.rows) {
            bool dropped = false;
            RecordRow c = coarsen_row(row, spec, bset.get(), dropped);
            if (dropped)
                ++result.dropped;
            else
                rows.push_back(c);
        }
        append_rows(*rep, rows);
        result.coarsened = rows.size();
        st.meta.replicas[spec.key()] = replica_id;
    }
    {
        std::unique_lock map_lock(streams_mu_);
        streams_[replica_id] = std::move(rep);
    }
    save_catalog();
    return result;
}

void Store::register_boundary_set(BoundarySet set) {
    for (const auto& r : set.regions)
        if (!point_in_polygon(r.representative, r.polygon))
            throw std::invalid_argument("representative point of region '" + r.id +
                                        "' lies outside its polygon");
    std::lock_guard lock(catalog_mu_);
    boundary_sets_[set.name] = std::make_shared<BoundarySet>(std::move(set));
    save_catalog();
}

std::shared_ptr<const BoundarySet> Store::boundary_set(const std::string& name) const {
    std::lock_guard lock(catalog_mu_);
    auto it = boundary_sets_.find(name);
    return it == boundary_sets_.end() ? nullptr : it->second;
}

nlohmann::json Store::app_state() const {
    std::lock_guard lock(catalog_mu_);
    return *app_state_;
}

void Store::set_app_state(nlohmann::json state) {
    std::lock_guard lock(catalog_mu_);
    *app_state_ = std::move(state);
    save_catalog();
}

}  // namespace streetx
