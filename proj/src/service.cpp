#include "streetx/service.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include <nlohmann/json.hpp>

namespace streetx {

namespace {

std::int64_t elapsed_us(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::steady_clock::now() - since)
        .count();
}

}  // namespace

QueryRequest query_request_from_json(const nlohmann::json& body) {
    QueryRequest req;
    req.user_id = body.at("userId").get<std::string>();
    for (const auto& d : body.at("DsID")) req.stream_ids.push_back(d.get<std::string>());
    const auto& box = body.at("SpaceBox");
    if (!box.is_array() || box.size() != 4)
        throw std::invalid_argument("\"SpaceBox\" must be [lat_min, lat_max, lng_min, lng_max]");
    req.space_box = {box.at(0).get<double>(), box.at(1).get<double>(), box.at(2).get<double>(),
                     box.at(3).get<double>()};
    const auto& range = body.at("TimeRange");
    if (!range.is_array() || range.size() != 2)
        throw std::invalid_argument("\"TimeRange\" must be [ts_min, ts_max]");
    req.time_range = {range.at(0).get<std::int64_t>(), range.at(1).get<std::int64_t>()};
    return req;
}

nlohmann::json query_response_to_json(const QueryResponse& resp) {
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : resp.results) {
        nlohmann::json records = nlohmann::json::array();
        for (const auto& rec : r.records)
            records.push_back({{"lat", rec.lat},
                               {"lng", rec.lng},
                               {"time", rec.timestamp},
                               {"value", rec.value}});
        nlohmann::json entry{{"DsID", r.stream_id},
                             {"status", r.status},
                             {"count", r.count},
                             {"records", std::move(records)},
                             {"timing",
                              {{"prefilterUs", r.prefilter_us},
                               {"indexUs", r.index_us},
                               {"filterUs", r.filter_us}}}};
        if (r.sharing)
            entry["sharing"] = {{"mode", sharing_mode_name(r.sharing->mode)},
                                {"policyUpdateEffect", r.sharing->policy_update_effect}};
        else
            entry["sharing"] = nullptr;
        entry["resolution"] = r.resolution ? nlohmann::json(*r.resolution) : nlohmann::json(nullptr);
        results.push_back(std::move(entry));
    }
    return {{"userId", resp.user_id}, {"results", std::move(results)}};
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(Store& store, Options options) : store_(store), options_(options) {
    load_persisted();
}

void Engine::load_persisted() {
    const nlohmann::json state = store_.app_state();
    if (state.contains("keywords")) keywords_.load_json(state.at("keywords"));
    std::lock_guard lock(policies_mu_);
    if (state.contains("policies")) {
        for (const auto& p : state.at("policies")) {
            PolicyRec rec;
            rec.id = p.at("id").get<std::int64_t>();
            rec.owner = p.at("owner").get<std::string>();
            rec.text = p.at("text").get<std::string>();
            const PolicyAst ast = parse_policy(rec.text);
            rec.streams = ast.what;
            rec.users = ast.whom;
            policies_[rec.id] = std::move(rec);
        }
    }
    next_policy_id_ = state.value("nextPolicyId", std::int64_t{1});
    // Rebuild the constraint cache for every affected pair.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [id, rec] : policies_)
        for (const auto& s : rec.streams)
            for (const auto& u : rec.users) pairs.insert({s, u});
    for (const auto& [s, u] : pairs) refresh_pair_locked(s, u);
}

void Engine::persist_locked() {
    nlohmann::json state;
    state["keywords"] = keywords_.to_json();
    nlohmann::json policies = nlohmann::json::array();
    for (const auto& [id, rec] : policies_)
        policies.push_back({{"id", rec.id}, {"owner", rec.owner}, {"text", rec.text}});
    state["policies"] = std::move(policies);
    state["nextPolicyId"] = next_policy_id_;
    store_.set_app_state(std::move(state));
}

KeywordDef Engine::define_keyword(const std::string& owner, const nlohmann::json& def,
                                  std::vector<std::string>* warnings) {
    KeywordDef out = keywords_.register_keyword(owner, def, warnings);
    std::lock_guard lock(policies_mu_);
    persist_locked();
    // A replaced definition changes every policy that references it.
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [id, rec] : policies_)
        if (rec.owner == owner)
            for (const auto& s : rec.streams)
                for (const auto& u : rec.users) pairs.insert({s, u});
    for (const auto& [s, u] : pairs) refresh_pair_locked(s, u);
    return out;
}

std::vector<KeywordDef> Engine::list_keywords(const std::string& owner) const {
    return keywords_.list(owner);
}

std::optional<ConstraintSet> Engine::compile_pair(const std::string& stream_id,
                                                  const std::string& user_id,
                                                  bool reparse_definitions) const {
    const StreamMeta meta = store_.meta(stream_id);
    std::vector<ConstraintSet> sets;
    for (const auto& [id, rec] : policies_) {
        if (std::find(rec.streams.begin(), rec.streams.end(), stream_id) == rec.streams.end())
            continue;
        if (std::find(rec.users.begin(), rec.users.end(), user_id) == rec.users.end()) continue;
        const PolicyAst ast = parse_policy(rec.text);
        const ResolvedPolicy resolved =
            resolve_ast(ast, keywords_, rec.owner, reparse_definitions);
        sets.push_back(compile_policy(resolved, meta, user_id, id));
    }
    if (sets.empty()) return std::nullopt;
    return merge_policies(sets);
}

void Engine::refresh_pair_locked(const std::string& stream_id, const std::string& user_id) {
    auto merged = compile_pair(stream_id, user_id, false);
    if (!merged) {
        cache_.erase(stream_id, user_id);
        return;
    }
    std::size_t removed = 0;
    ConstraintSet prepared = options_.optimizer_enabled
                                 ? group_constraints(std::move(*merged), &removed)
                                 : std::move(*merged);
    stats_.polygons_grouped_away.fetch_add(removed, std::memory_order_relaxed);
    auto entry = std::make_shared<PreparedConstraints>();
    entry->merged = std::make_shared<const ConstraintSet>(std::move(prepared));
    entry->polygons_grouped_away = removed;
    cache_.put(stream_id, user_id, std::move(entry));
}

void Engine::refresh_stream_locked(const std::string& stream_id) {
    std::set<std::string> users;
    for (const auto& [id, rec] : policies_)
        if (std::find(rec.streams.begin(), rec.streams.end(), stream_id) != rec.streams.end())
            users.insert(rec.users.begin(), rec.users.end());
    for (const auto& u : users) refresh_pair_locked(stream_id, u);
}

void Engine::check_policy_viable(const ResolvedPolicy& resolved, const std::string& owner,
                                 std::optional<std::int64_t> replacing_id,
                                 const std::string& text) const {
    for (const auto& stream_id : resolved.streams) {
        const StreamMeta meta = store_.meta(stream_id);  // throws NotFoundError when unknown
        if (meta.hidden)
            throw ForbiddenError("stream '" + stream_id + "' is an internal resolution replica");
        if (meta.owner != owner)
            throw ForbiddenError("caller does not own stream '" + stream_id +
                                 "' named in the What construct");
    }
    if (resolved.space_resolution && !store_.boundary_set(*resolved.space_resolution))
        throw NotFoundError("space resolution '" + *resolved.space_resolution +
                            "' needs a registered boundary set of that name");
    // Trial-merge against the existing policies of every affected pair; a
    // scenario-3 conflict aborts the mutation before anything is committed.
    for (const auto& stream_id : resolved.streams) {
        const StreamMeta meta = store_.meta(stream_id);
        for (const auto& user_id : resolved.users) {
            std::vector<ConstraintSet> sets;
            for (const auto& [id, rec] : policies_) {
                if (replacing_id && *replacing_id == id) continue;
                if (std::find(rec.streams.begin(), rec.streams.end(), stream_id) ==
                    rec.streams.end())
                    continue;
                if (std::find(rec.users.begin(), rec.users.end(), user_id) == rec.users.end())
                    continue;
                const ResolvedPolicy other =
                    resolve_ast(parse_policy(rec.text), keywords_, rec.owner);
                sets.push_back(compile_policy(other, meta, user_id, id));
            }
            sets.push_back(compile_policy(resolved, meta, user_id, replacing_id.value_or(0)));
            merge_policies(sets);  // throws PolicyConflictError on incomparable resolutions
        }
    }
    (void)text;
}

std::int64_t Engine::create_policy(const std::string& owner, const std::string& text,
                                   std::vector<std::string>* warnings) {
    const PolicyAst ast = parse_policy(text, warnings);
    std::lock_guard lock(policies_mu_);
    const ResolvedPolicy resolved = resolve_ast(ast, keywords_, owner);
    check_policy_viable(resolved, owner, std::nullopt, text);
    // Resolution replicas must exist before the first redirected query.
    for (const auto& stream_id : resolved.streams) {
        if (resolved.time_resolution)
            store_.coarsen_stream(stream_id, ResolutionSpec{ResolutionSpec::Dimension::Time,
                                                            *resolved.time_resolution, {}});
        if (resolved.space_resolution)
            store_.coarsen_stream(stream_id,
                                  ResolutionSpec{ResolutionSpec::Dimension::Space, TimeBucket::Hour,
                                                 *resolved.space_resolution});
    }
    const std::int64_t id = next_policy_id_++;
    policies_[id] = PolicyRec{id, owner, text, resolved.streams, resolved.users};
    persist_locked();
    for (const auto& s : resolved.streams)
        for (const auto& u : resolved.users) refresh_pair_locked(s, u);
    return id;
}

void Engine::update_policy(const std::string& owner, std::int64_t policy_id,
                           const std::string& text, std::vector<std::string>* warnings) {
    const PolicyAst ast = parse_policy(text, warnings);
    std::lock_guard lock(policies_mu_);
    auto it = policies_.find(policy_id);
    if (it == policies_.end())
        throw NotFoundError("unknown policy id " + std::to_string(policy_id));
    if (it->second.owner != owner)
        throw ForbiddenError("only the policy owner may update it");
    const ResolvedPolicy resolved = resolve_ast(ast, keywords_, owner);
    check_policy_viable(resolved, owner, policy_id, text);
    for (const auto& stream_id : resolved.streams) {
        if (resolved.time_resolution)
            store_.coarsen_stream(stream_id, ResolutionSpec{ResolutionSpec::Dimension::Time,
                                                            *resolved.time_resolution, {}});
        if (resolved.space_resolution)
            store_.coarsen_stream(stream_id,
                                  ResolutionSpec{ResolutionSpec::Dimension::Space, TimeBucket::Hour,
                                                 *resolved.space_resolution});
    }
    std::set<std::pair<std::string, std::string>> affected;
    for (const auto& s : it->second.streams)
        for (const auto& u : it->second.users) affected.insert({s, u});
    it->second.text = text;
    it->second.streams = resolved.streams;
    it->second.users = resolved.users;
    for (const auto& s : resolved.streams)
        for (const auto& u : resolved.users) affected.insert({s, u});
    persist_locked();
    for (const auto& [s, u] : affected) refresh_pair_locked(s, u);
}

void Engine::delete_policy(const std::string& owner, std::int64_t policy_id) {
    std::lock_guard lock(policies_mu_);
    auto it = policies_.find(policy_id);
    if (it == policies_.end())
        throw NotFoundError("unknown policy id " + std::to_string(policy_id));
    if (it->second.owner != owner)
        throw ForbiddenError("only the policy owner may delete it");
    std::set<std::pair<std::string, std::string>> affected;
    for (const auto& s : it->second.streams)
        for (const auto& u : it->second.users) affected.insert({s, u});
    policies_.erase(it);
    persist_locked();
    for (const auto& [s, u] : affected) refresh_pair_locked(s, u);
}

std::optional<PolicyInfo> Engine::policy(std::int64_t policy_id) const {
    std::lock_guard lock(policies_mu_);
    auto it = policies_.find(policy_id);
    if (it == policies_.end()) return std::nullopt;
    return PolicyInfo{it->second.id, it->second.owner, it->second.text};
}

std::vector<PolicyInfo> Engine::policies() const {
    std::lock_guard lock(policies_mu_);
    std::vector<PolicyInfo> out;
    for (const auto& [id, rec] : policies_) out.push_back({rec.id, rec.owner, rec.text});
    return out;
}

nlohmann::json Engine::policy_constraints(std::int64_t policy_id) const {
    std::lock_guard lock(policies_mu_);
    auto it = policies_.find(policy_id);
    if (it == policies_.end())
        throw NotFoundError("unknown policy id " + std::to_string(policy_id));
    const PolicyRec& rec = it->second;
    const ResolvedPolicy resolved = resolve_ast(parse_policy(rec.text), keywords_, rec.owner);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& s : rec.streams) {
        const StreamMeta meta = store_.meta(s);
        for (const auto& u : rec.users) {
            nlohmann::json entry = constraints_to_json(compile_policy(resolved, meta, u, rec.id));
            entry["DsID"] = s;
            entry["userId"] = u;
            entries.push_back(std::move(entry));
        }
    }
    return {{"policyId", policy_id}, {"constraints", std::move(entries)}};
}

StreamMeta Engine::create_stream(const std::string& owner, const std::string& stream_id,
                                 const std::string& description) {
    return store_.create_stream(owner, stream_id, description);
}

IngestReport Engine::ingest(const std::string& caller, const std::string& stream_id,
                            std::span<const DataRecord> batch) {
    const StreamMeta before = store_.meta(stream_id);
    IngestReport report = store_.ingest(caller, stream_id, batch);
    const StreamMeta after = store_.meta(stream_id);
    // When windows compile against the metadata span; keep the cache honest.
    if (before.count != after.count &&
        (before.count == 0 || before.t_min != after.t_min || before.t_max != after.t_max)) {
        std::lock_guard lock(policies_mu_);
        refresh_stream_locked(stream_id);
    }
    return report;
}

StreamResult Engine::evaluate_stream(const std::string& stream_id, const QueryRequest& req) {
    StreamResult result;
    result.stream_id = stream_id;
    if (!store_.has_stream(stream_id)) {
        result.status = "unknown-stream";
        return result;
    }
    const StreamMeta meta = store_.meta(stream_id);
    if (meta.hidden) {
        result.status = "unknown-stream";  // replicas are invisible, even to the owner
        return result;
    }
    stats_.queries_seen.fetch_add(1, std::memory_order_relaxed);

    if (meta.owner == req.user_id) {
        // Owner bypass: the query is answered directly.
        const auto t0 = std::chrono::steady_clock::now();
        auto rows = store_.range_query_rows(stream_id, req.space_box, req.time_range);
        result.index_us = elapsed_us(t0);
        result.records.reserve(rows.size());
        for (auto& row : rows) result.records.push_back(row.rec);
        result.count = result.records.size();
        result.status = "ok";
        return result;
    }

    const auto t_pre = std::chrono::steady_clock::now();
    std::shared_ptr<const ConstraintSet> merged;
    if (options_.constraint_cache_enabled) {
        if (auto entry = cache_.find(stream_id, req.user_id)) merged = entry->merged;
    } else {
        // Uncached path: re-translate the policy from its persisted text and
        // keyword definitions for this query.
        std::lock_guard lock(policies_mu_);
        if (auto compiled = compile_pair(stream_id, req.user_id, /*reparse_definitions=*/true))
            merged = std::make_shared<const ConstraintSet>(std::move(*compiled));
    }
    if (!merged) {
        result.status = "no-access";
        result.prefilter_us = elapsed_us(t_pre);
        return result;
    }
    result.sharing = merged->sharing;
    if (options_.optimizer_enabled &&
        !satisfiable(req.space_box, req.time_range, *merged)) {
        result.status = "rejected-by-policy";
        result.prefilter_us = elapsed_us(t_pre);
        stats_.queries_rejected.fetch_add(1, std::memory_order_relaxed);
        return result;
    }
    result.prefilter_us = elapsed_us(t_pre);

    const EffectiveQuery eff = effective_constraints(req.space_box, req.time_range, merged);

    // Group source policies by resolution; each group reads its own replica.
    std::map<std::string, std::vector<const PolicySlice*>> groups;
    for (const auto& slice : merged->slices)
        groups[slice.resolution ? slice.resolution->key() : std::string{}].push_back(&slice);

    auto fetch = [&](const std::string& key) -> std::vector<RecordRow> {
        std::string target = stream_id;
        if (!key.empty()) {
            auto it = meta.replicas.find(key);
            if (it != meta.replicas.end()) {
                target = it->second;
            } else {
                // Replicas are created with the policy; recover if missing.
                const PolicySlice* slice = groups.at(key).front();
                target = store_.coarsen_stream(stream_id, *slice->resolution).replica_id;
            }
        }
        const auto t0 = std::chrono::steady_clock::now();
        auto rows = store_.range_query_rows(target, req.space_box, req.time_range);
        result.index_us += elapsed_us(t0);
        return rows;
    };

    if (groups.size() == 1) {
        auto rows = fetch(groups.begin()->first);
        const auto t0 = std::chrono::steady_clock::now();
        result.records.reserve(rows.size());
        for (const auto& row : rows)
            if (filter_record(row.rec, eff)) result.records.push_back(row.rec);
        result.filter_us = elapsed_us(t0);
        if (!groups.begin()->first.empty())
            result.resolution = groups.begin()->second.front()->resolution->display();
    } else {
        // Mixed resolutions: evaluate per slice group and keep the coarsest
        // claim on every source record (least privilege in the overlap).
        std::map<std::uint64_t, std::pair<int, DataRecord>> claimed;
        std::set<std::string> applied;
        for (const auto& [key, slices] : groups) {
            auto rows = fetch(key);
            const auto t0 = std::chrono::steady_clock::now();
            const int coarseness = resolution_coarseness(
                slices.front()->resolution ? *slices.front()->resolution
                                           : std::optional<ResolutionSpec>{});
            for (const auto& row : rows) {
                bool pass = false;
                for (const PolicySlice* slice : slices) {
                    const IntervalSet slice_time =
                        intersect(eff.effective_time, slice->allowed_time);
                    if (record_passes(row.rec, slice->allow_polygons,
                                      slice->allow_polygons.empty(), merged->deny_polygons,
                                      slice_time)) {
                        pass = true;
                        break;
                    }
                }
                if (!pass) continue;
                auto [it, inserted] = claimed.try_emplace(row.source_index, coarseness, row.rec);
                if (!inserted && coarseness > it->second.first)
                    it->second = {coarseness, row.rec};
                if (!key.empty()) applied.insert(slices.front()->resolution->display());
            }
            result.filter_us += elapsed_us(t0);
        }
        result.records.reserve(claimed.size());
        for (const auto& [idx, entry] : claimed) result.records.push_back(entry.second);
        if (!applied.empty()) {
            std::string joined;
            for (const auto& r : applied) joined += (joined.empty() ? "" : ",") + r;
            result.resolution = joined;
        }
    }
    result.count = result.records.size();
    result.status = "ok";
    return result;
}

QueryResponse Engine::handle_query(const QueryRequest& req) {
    if (!store_.has_user(req.user_id))
        throw NotFoundError("unknown user '" + req.user_id + "'");
    if (req.stream_ids.empty()) throw std::invalid_argument("\"DsID\" must name at least one stream");
    validate_box(req.space_box);
    validate_window(req.time_range);
    QueryResponse resp;
    resp.user_id = req.user_id;
    resp.results.reserve(req.stream_ids.size());
    for (const auto& id : req.stream_ids) resp.results.push_back(evaluate_stream(id, req));
    return resp;
}

EngineStats Engine::stats() const {
    EngineStats out;
    out.queries_seen = stats_.queries_seen.load();
    out.queries_rejected = stats_.queries_rejected.load();
    out.polygons_grouped_away = stats_.polygons_grouped_away.load();
    out.index_accesses = store_.index_accesses();
    {
        std::lock_guard lock(policies_mu_);
        out.policies = policies_.size();
    }
    out.cache_entries = cache_.size();
    return out;
}

AuditReport Engine::audit() const {
    std::lock_guard lock(policies_mu_);
    std::map<ConstraintCache::Key, ConstraintSet> truth;
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& [id, rec] : policies_)
        for (const auto& s : rec.streams)
            for (const auto& u : rec.users) pairs.insert({s, u});
    for (const auto& [s, u] : pairs) {
        auto merged = compile_pair(s, u, false);
        if (!merged) continue;
        truth.emplace(ConstraintCache::Key{s, u},
                      options_.optimizer_enabled ? group_constraints(std::move(*merged))
                                                 : std::move(*merged));
    }
    return audit_cache(cache_, truth);
}

}  // namespace streetx
