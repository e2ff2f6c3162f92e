#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "streetx/optimizer.hpp"
#include "streetx/policy_engine.hpp"
#include "streetx/policy_lang.hpp"
#include "streetx/store.hpp"

#include <nlohmann/json_fwd.hpp>

namespace streetx {

// Representation-1 user query.
struct QueryRequest {
    std::string user_id;
    std::vector<std::string> stream_ids;
    BoundingBox space_box;
    TimeWindow time_range;
};

QueryRequest query_request_from_json(const nlohmann::json& body);

struct StreamResult {
    std::string stream_id;
    // ok | rejected-by-policy | no-access | unknown-stream
    std::string status;
    std::vector<DataRecord> records;
    std::uint64_t count = 0;
    std::optional<SharingSpec> sharing;          // present whenever a policy applied
    std::optional<std::string> resolution;        // resolution applied, if redirected
    std::int64_t prefilter_us = 0;
    std::int64_t index_us = 0;
    std::int64_t filter_us = 0;
};

struct QueryResponse {
    std::string user_id;
    std::vector<StreamResult> results;
};

nlohmann::json query_response_to_json(const QueryResponse& resp);

struct PolicyInfo {
    std::int64_t id = 0;
    std::string owner;
    std::string text;
};

struct EngineStats {
    std::uint64_t queries_seen = 0;
    std::uint64_t queries_rejected = 0;
    std::uint64_t polygons_grouped_away = 0;
    std::uint64_t index_accesses = 0;
    std::uint64_t policies = 0;
    std::uint64_t cache_entries = 0;
};

/// The query/policy workflow tying parser, engine, optimizer, and store
/// together. `optimizer_enabled` controls the satisfiability gate and
/// constraint grouping; `constraint_cache_enabled` controls whether merged
/// constraints are kept in memory or re-translated from the persisted policy
/// text and keyword definitions on every query.
struct EngineOptions {
    bool optimizer_enabled = true;
    bool constraint_cache_enabled = true;
};

class Engine {
public:
    using Options = EngineOptions;

    explicit Engine(Store& store, Options options = {});

    Store& store() { return store_; }
    const Options& options() const { return options_; }

    // --- keywords ---------------------------------------------------------
    KeywordDef define_keyword(const std::string& owner, const nlohmann::json& def,
                              std::vector<std::string>* warnings = nullptr);
    std::vector<KeywordDef> list_keywords(const std::string& owner) const;

    // --- policies ---------------------------------------------------------
    std::int64_t create_policy(const std::string& owner, const std::string& text,
                               std::vector<std::string>* warnings = nullptr);
    void update_policy(const std::string& owner, std::int64_t policy_id, const std::string& text,
                       std::vector<std::string>* warnings = nullptr);
    void delete_policy(const std::string& owner, std::int64_t policy_id);
    std::optional<PolicyInfo> policy(std::int64_t policy_id) const;
    std::vector<PolicyInfo> policies() const;
    // Representation-2 JSON of the compiled constraints, one entry per
    // (stream, user) pair the policy affects.
    nlohmann::json policy_constraints(std::int64_t policy_id) const;

    // --- data path ---------------------------------------------------------
    StreamMeta create_stream(const std::string& owner, const std::string& stream_id,
                             const std::string& description);
    // Store ingest plus constraint refresh: a batch that extends the stream's
    // metadata span changes compiled When windows, so affected pairs recompile.
    IngestReport ingest(const std::string& caller, const std::string& stream_id,
                        std::span<const DataRecord> batch);

    QueryResponse handle_query(const QueryRequest& req);

    // --- introspection ------------------------------------------------------
    EngineStats stats() const;
    AuditReport audit() const;

    // Test hook: overwrite a cache entry to fault-inject divergence.
    ConstraintCache& cache_for_test() { return cache_; }

private:
    struct PolicyRec {
        std::int64_t id = 0;
        std::string owner;
        std::string text;
        std::vector<std::string> streams;  // resolved What
        std::vector<std::string> users;    // resolved Whom
    };

    void persist_locked();
    void load_persisted();
    // Compile + merge every policy affecting (stream, user); nullopt when none.
    std::optional<ConstraintSet> compile_pair(const std::string& stream_id,
                                              const std::string& user_id,
                                              bool reparse_definitions) const;
    void refresh_pair_locked(const std::string& stream_id, const std::string& user_id);
    void refresh_stream_locked(const std::string& stream_id);
    // Validates a mutation end to end (ownership, resolution replicas, merge
    // conflicts) before committing it.
    void check_policy_viable(const ResolvedPolicy& resolved, const std::string& owner,
                             std::optional<std::int64_t> replacing_id,
                             const std::string& text) const;
    StreamResult evaluate_stream(const std::string& stream_id, const QueryRequest& req);

    Store& store_;
    Options options_;
    KeywordRegistry keywords_;
    mutable std::mutex policies_mu_;  // serializes policy mutations and cache swaps
    std::map<std::int64_t, PolicyRec> policies_;
    std::int64_t next_policy_id_ = 1;
    ConstraintCache cache_;
    mutable OptimizerStats stats_;
};

// ---------------------------------------------------------------------------
// HTTP front end

struct ServiceConfig {
    std::string listen = "127.0.0.1";
    int port = 8080;
    std::string data_dir = "streetx-data";
    std::string token_file;  // JSON {"<token>": "<user id>", ...}
    bool optimizer_enabled = true;

    // Reads the JSON config file (all keys optional), then applies
    // STREETX_LISTEN / STREETX_PORT / STREETX_DATA_DIR / STREETX_TOKEN_FILE
    // environment overrides.
    static ServiceConfig load(const std::string& config_path);
};

/// Token-authenticated JSON endpoints over cpp-httplib. Each request binds
/// one cache snapshot and one store view; handlers map engine errors to
/// status codes.
class HttpServer {
public:
    HttpServer(Engine& engine, std::map<std::string, std::string> token_to_user);
    ~HttpServer();

    // Binds and serves on a background thread; returns the bound port.
    int start(const std::string& host, int port);  // port 0 picks a free port
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::map<std::string, std::string> load_token_file(const std::string& path);

}  // namespace streetx
