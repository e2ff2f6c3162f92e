#include "streetx/service.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace streetx {

ServiceConfig ServiceConfig::load(const std::string& config_path) {
    ServiceConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::runtime_error("cannot open config file '" + config_path + "'");
        nlohmann::json j = nlohmann::json::parse(in);
        cfg.listen = j.value("listen", cfg.listen);
        cfg.port = j.value("port", cfg.port);
        cfg.data_dir = j.value("dataDir", cfg.data_dir);
        cfg.token_file = j.value("tokenFile", cfg.token_file);
        cfg.optimizer_enabled = j.value("optimizer", cfg.optimizer_enabled);
    }
    if (const char* v = std::getenv("STREETX_LISTEN")) cfg.listen = v;
    if (const char* v = std::getenv("STREETX_PORT")) cfg.port = std::stoi(v);
    if (const char* v = std::getenv("STREETX_DATA_DIR")) cfg.data_dir = v;
    if (const char* v = std::getenv("STREETX_TOKEN_FILE")) cfg.token_file = v;
    return cfg;
}

std::map<std::string, std::string> load_token_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open token file '" + path + "'");
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::string, std::string> tokens;
    for (auto it = j.begin(); it != j.end(); ++it)
        tokens[it.key()] = it.value().get<std::string>();
    if (tokens.empty()) throw std::runtime_error("token file '" + path + "' defines no users");
    return tokens;
}

namespace {

nlohmann::json error_body(const std::string& message) { return {{"error", message}}; }

std::vector<DataRecord> parse_record_body(const std::string& body, bool csv,
                                          std::vector<std::string>* notes) {
    std::vector<DataRecord> records;
    std::istringstream in(body);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        DataRecord rec;
        if (csv) {
            std::istringstream row(line);
            std::string field;
            double nums[4];
            for (int i = 0; i < 4; ++i) {
                if (!std::getline(row, field, ','))
                    throw std::invalid_argument("line " + std::to_string(lineno) +
                                                ": want lat,lng,time,value");
                nums[i] = std::stod(field);
            }
            rec = {nums[0], nums[1], static_cast<std::int64_t>(nums[2]), nums[3]};
            if (nums[2] != static_cast<double>(rec.timestamp) && notes)
                notes->push_back("line " + std::to_string(lineno) +
                                 ": sub-second time truncated to whole seconds");
        } else {
            nlohmann::json j = nlohmann::json::parse(line);
            rec.lat = j.at("lat").get<double>();
            rec.lng = j.at("lng").get<double>();
            rec.value = j.at("value").get<double>();
            const auto& t = j.at("time");
            if (t.is_number_float()) {
                rec.timestamp = static_cast<std::int64_t>(t.get<double>());
                if (notes)
                    notes->push_back("line " + std::to_string(lineno) +
                                     ": sub-second time truncated to whole seconds");
            } else {
                rec.timestamp = t.get<std::int64_t>();
            }
        }
        records.push_back(rec);
    }
    return records;
}

}  // namespace

struct HttpServer::Impl {
    Engine& engine;
    std::map<std::string, std::string> tokens;
    httplib::Server server;
    std::thread thread;

    Impl(Engine& e, std::map<std::string, std::string> t) : engine(e), tokens(std::move(t)) {
        for (const auto& [tok, user] : tokens) engine.store().ensure_user(user);
        route();
    }

    std::optional<std::string> caller(const httplib::Request& req) const {
        std::string tok;
        if (req.has_header("X-Api-Token")) {
            tok = req.get_header_value("X-Api-Token");
        } else if (req.has_header("Authorization")) {
            const std::string auth = req.get_header_value("Authorization");
            if (auth.rfind("Bearer ", 0) == 0) tok = auth.substr(7);
        }
        auto it = tokens.find(tok);
        if (it == tokens.end()) return std::nullopt;
        return it->second;
    }

    using Handler = std::function<void(const std::string& user, const httplib::Request&,
                                       httplib::Response&)>;

    void handle(const httplib::Request& req, httplib::Response& res, const Handler& h) {
        const auto user = caller(req);
        if (!user) {
            res.status = 401;
            res.set_content(error_body("missing or invalid API token").dump(), "application/json");
            return;
        }
        try {
            h(*user, req, res);
        } catch (const ParseError& e) {
            res.status = 400;
            nlohmann::json body = error_body(e.what());
            body["offset"] = e.offset;
            body["construct"] = e.construct;
            res.set_content(body.dump(), "application/json");
        } catch (const ResolveError& e) {
            res.status = 400;
            nlohmann::json body = error_body(e.what());
            body["construct"] = e.construct;
            res.set_content(body.dump(), "application/json");
        } catch (const PolicyConflictError& e) {
            res.status = 409;
            res.set_content(error_body(e.what()).dump(), "application/json");
        } catch (const ForbiddenError& e) {
            res.status = 403;
            res.set_content(error_body(e.what()).dump(), "application/json");
        } catch (const NotFoundError& e) {
            res.status = 404;
            res.set_content(error_body(e.what()).dump(), "application/json");
        } catch (const std::invalid_argument& e) {
            res.status = 400;
            res.set_content(error_body(e.what()).dump(), "application/json");
        } catch (const nlohmann::json::exception& e) {
            res.status = 400;
            res.set_content(error_body(std::string("malformed request: ") + e.what()).dump(),
                            "application/json");
        } catch (const std::exception& e) {
            res.status = 500;
            res.set_content(error_body(e.what()).dump(), "application/json");
        }
    }

    void route() {
        server.Post("/streams", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                nlohmann::json body = nlohmann::json::parse(r.body);
                const StreamMeta meta = engine.create_stream(
                    user, body.at("id").get<std::string>(), body.value("description", ""));
                out.status = 201;
                out.set_content(
                    nlohmann::json{{"id", meta.id}, {"owner", meta.owner}, {"count", meta.count}}
                        .dump(),
                    "application/json");
            });
        });

        server.Post(R"(/streams/([^/]+)/records)",
                    [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                const bool csv = r.get_param_value("format") == "csv" ||
                                 r.get_header_value("Content-Type").rfind("text/csv", 0) == 0;
                std::vector<std::string> notes;
                const auto records = parse_record_body(r.body, csv, &notes);
                IngestReport report = engine.ingest(user, r.matches[1], records);
                nlohmann::json body{{"accepted", report.accepted},
                                    {"rejected", report.rejected},
                                    {"reasons", report.reasons}};
                if (!notes.empty()) body["notes"] = notes;
                out.set_content(body.dump(), "application/json");
            });
        });

        server.Post("/keywords", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                std::vector<std::string> warnings;
                const KeywordDef def =
                    engine.define_keyword(user, nlohmann::json::parse(r.body), &warnings);
                out.status = 201;
                out.set_content(nlohmann::json{{"name", def.name},
                                               {"type", def.kind == KeywordKind::Where ? "Where"
                                                                                       : "When"},
                                               {"version", def.version},
                                               {"warnings", warnings}}
                                    .dump(),
                                "application/json");
            });
        });

        server.Get("/keywords", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request&,
                                    httplib::Response& out) {
                nlohmann::json list = nlohmann::json::array();
                for (const auto& def : engine.list_keywords(user))
                    list.push_back({{"name", def.name},
                                    {"type", def.kind == KeywordKind::Where ? "Where" : "When"},
                                    {"version", def.version}});
                out.set_content(list.dump(), "application/json");
            });
        });

        server.Post("/policies", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                nlohmann::json body = nlohmann::json::parse(r.body);
                std::vector<std::string> warnings;
                const std::int64_t id =
                    engine.create_policy(user, body.at("policy").get<std::string>(), &warnings);
                out.status = 201;
                out.set_content(nlohmann::json{{"policyId", id}, {"warnings", warnings}}.dump(),
                                "application/json");
            });
        });

        server.Put(R"(/policies/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                nlohmann::json body = nlohmann::json::parse(r.body);
                std::vector<std::string> warnings;
                engine.update_policy(user, std::stoll(r.matches[1]),
                                     body.at("policy").get<std::string>(), &warnings);
                out.set_content(nlohmann::json{{"status", "updated"}, {"warnings", warnings}}.dump(),
                                "application/json");
            });
        });

        server.Delete(R"(/policies/(\d+))",
                      [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                engine.delete_policy(user, std::stoll(r.matches[1]));
                out.set_content(nlohmann::json{{"status", "deleted"}}.dump(), "application/json");
            });
        });

        server.Get(R"(/policies/(\d+)/constraints)",
                   [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                const std::int64_t id = std::stoll(r.matches[1]);
                const auto info = engine.policy(id);
                if (!info) throw NotFoundError("unknown policy id " + std::to_string(id));
                if (info->owner != user)
                    throw ForbiddenError("only the policy owner may inspect its constraints");
                out.set_content(engine.policy_constraints(id).dump(), "application/json");
            });
        });

        server.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string& user, const httplib::Request& r,
                                    httplib::Response& out) {
                const QueryRequest query = query_request_from_json(nlohmann::json::parse(r.body));
                if (query.user_id != user)
                    throw ForbiddenError("query userId does not match the authenticated caller");
                out.set_content(query_response_to_json(engine.handle_query(query)).dump(),
                                "application/json");
            });
        });

        server.Get("/stats", [this](const httplib::Request& req, httplib::Response& res) {
            handle(req, res, [this](const std::string&, const httplib::Request&,
                                    httplib::Response& out) {
                const EngineStats s = engine.stats();
                out.set_content(nlohmann::json{{"queriesSeen", s.queries_seen},
                                               {"queriesRejected", s.queries_rejected},
                                               {"polygonsGroupedAway", s.polygons_grouped_away},
                                               {"indexAccesses", s.index_accesses},
                                               {"policies", s.policies},
                                               {"cacheEntries", s.cache_entries}}
                                    .dump(),
                                "application/json");
            });
        });
    }
};

HttpServer::HttpServer(Engine& engine, std::map<std::string, std::string> token_to_user)
    : impl_(std::make_unique<Impl>(engine, std::move(token_to_user))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw std::runtime_error("cannot bind to a port on " + host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw std::runtime_error("cannot bind to " + host + ":" + std::to_string(port));
    }
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpServer::stop() {
    if (!impl_) return;
    if (impl_->server.is_running()) impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace streetx
