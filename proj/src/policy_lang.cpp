#include "streetx/policy_lang.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <mutex>

#include <nlohmann/json.hpp>

namespace streetx {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
               return std::tolower(x) == std::tolower(y);
           });
}

}  // namespace

// ---------------------------------------------------------------------------
// Reserved vocabulary

std::int64_t bucket_seconds(TimeBucket b) {
    switch (b) {
        case TimeBucket::Second: return 1;
        case TimeBucket::Minute: return 60;
        case TimeBucket::Hour: return 3600;
        case TimeBucket::Day: return 86400;
        case TimeBucket::Week: return 7 * 86400;
        default:
            throw std::invalid_argument("Month/Year buckets are calendar-sized, not fixed-width");
    }
}

const char* bucket_name(TimeBucket b) {
    switch (b) {
        case TimeBucket::Second: return "Second";
        case TimeBucket::Minute: return "Minute";
        case TimeBucket::Hour: return "Hour";
        case TimeBucket::Day: return "Day";
        case TimeBucket::Week: return "Week";
        case TimeBucket::Month: return "Month";
        case TimeBucket::Year: return "Year";
    }
    return "?";
}

std::optional<TimeBucket> parse_time_bucket(const std::string& name) {
    static const std::array<std::pair<const char*, TimeBucket>, 7> table{{
        {"second", TimeBucket::Second},
        {"minute", TimeBucket::Minute},
        {"hour", TimeBucket::Hour},
        {"day", TimeBucket::Day},
        {"week", TimeBucket::Week},
        {"month", TimeBucket::Month},
        {"year", TimeBucket::Year},
    }};
    const std::string s = lower(name);
    for (const auto& [n, b] : table)
        if (s == n) return b;
    return std::nullopt;
}

std::optional<std::string> parse_space_resolution(const std::string& name) {
    static const std::array<const char*, 4> table{"ZipCodes", "County", "City", "Country"};
    for (const char* n : table)
        if (iequals(name, n)) return std::string(n);
    return std::nullopt;
}

std::optional<SharingKeyword> parse_sharing_keyword(const std::string& name) {
    if (iequals(name, "AllowDataSharing")) return SharingKeyword::AllowDataSharing;
    if (iequals(name, "DenyDataSharing")) return SharingKeyword::DenyDataSharing;
    if (iequals(name, "PolicyUpdateEffect")) return SharingKeyword::PolicyUpdateEffect;
    return std::nullopt;
}

const char* sharing_keyword_name(SharingKeyword k) {
    switch (k) {
        case SharingKeyword::AllowDataSharing: return "AllowDataSharing";
        case SharingKeyword::DenyDataSharing: return "DenyDataSharing";
        case SharingKeyword::PolicyUpdateEffect: return "PolicyUpdateEffect";
    }
    return "?";
}

const char* sharing_mode_name(SharingSpec::Mode mode) {
    switch (mode) {
        case SharingSpec::Mode::Unspecified: return "Unspecified";
        case SharingSpec::Mode::Allow: return "AllowDataSharing";
        case SharingSpec::Mode::Deny: return "DenyDataSharing";
    }
    return "?";
}

bool is_reserved_keyword(const std::string& name) {
    return iequals(name, "NOT") || parse_time_bucket(name).has_value() ||
           parse_space_resolution(name).has_value() || parse_sharing_keyword(name).has_value();
}

// ---------------------------------------------------------------------------
// Date literals

namespace {

int days_in_month(int year, int month) {
    static const int table[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return table[month - 1];
}

std::int64_t civil_to_unix_day(int year, int month, int day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                                          std::chrono::day{unsigned(day)}};
    return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

struct CivilDate {
    int year, month, day;
};

CivilDate parse_civil_date(const std::string& text, std::vector<std::string>* warnings) {
    int parts[3] = {0, 0, 0};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
            throw std::invalid_argument("malformed date '" + text + "' (want M/D/YYYY)");
        std::size_t used = 0;
        parts[i] = std::stoi(text.substr(pos), &used);
        pos += used;
        if (i < 2) {
            if (pos >= text.size() || text[pos] != '/')
                throw std::invalid_argument("malformed date '" + text + "' (want M/D/YYYY)");
            ++pos;
        }
    }
    if (pos != text.size())
        throw std::invalid_argument("malformed date '" + text + "' (trailing characters)");
    auto [month, day, year] = std::tie(parts[0], parts[1], parts[2]);
    if (year < 1900 || year > 2999) throw std::invalid_argument("date year out of range in '" + text + "'");
    if (month < 1 || month > 12) throw std::invalid_argument("date month out of range in '" + text + "'");
    if (day < 1) throw std::invalid_argument("date day out of range in '" + text + "'");
    const int last = days_in_month(year, month);
    if (day > last) {
        if (day > 31) throw std::invalid_argument("date day out of range in '" + text + "'");
        if (warnings)
            warnings->push_back("date " + text + " does not exist; clamped to " +
                                std::to_string(month) + "/" + std::to_string(last) + "/" +
                                std::to_string(year));
        day = last;
    }
    return {year, month, day};
}

}  // namespace

TimeWindow parse_date_range_literal(const std::string& literal, std::vector<std::string>* warnings) {
    const auto dash = literal.find('-');
    if (dash == std::string::npos)
        throw std::invalid_argument("date range '" + literal + "' must be \"M/D/YYYY-M/D/YYYY\"");
    const CivilDate a = parse_civil_date(literal.substr(0, dash), warnings);
    const CivilDate b = parse_civil_date(literal.substr(dash + 1), warnings);
    const std::int64_t start = civil_to_unix_day(a.year, a.month, a.day) * kSecondsPerDay;
    const std::int64_t end = (civil_to_unix_day(b.year, b.month, b.day) + 1) * kSecondsPerDay;
    if (start >= end)
        throw std::invalid_argument("date range '" + literal + "' ends before it starts");
    return {start, end};
}

// ---------------------------------------------------------------------------
// Parser

namespace {

constexpr const char* kConstructNames[6] = {"What", "Where", "When", "How", "Whom", "Who"};

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class PolicyParser {
public:
    PolicyParser(const std::string& text, std::vector<std::string>* warnings)
        : text_(text), warnings_(warnings) {}

    PolicyAst parse() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("empty policy", 0, "");
        bool first = true;
        while (true) {
            if (!first) {
                skip_ws();
                if (pos_ >= text_.size()) break;
                if (text_[pos_] != '.')
                    throw ParseError("expected '.' between constructs", pos_, current_);
                ++pos_;
            }
            parse_construct();
            first = false;
            skip_ws();
            if (pos_ >= text_.size()) break;
        }
        finish();
        return ast_;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string ident() {
        skip_ws();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
        if (pos_ == start) throw ParseError("expected an identifier", pos_, current_);
        return text_.substr(start, pos_ - start);
    }

    void expect(char c) {
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != c)
            throw ParseError(std::string("expected '") + c + "'", pos_, current_);
        ++pos_;
    }

    std::string quoted() {
        // opening quote already consumed
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '"') ++pos_;
        if (pos_ >= text_.size()) throw ParseError("unterminated quoted literal", start, current_);
        std::string body = text_.substr(start, pos_ - start);
        ++pos_;
        return body;
    }

    void parse_construct() {
        const std::size_t name_at = pos_;
        const std::string name = ident();
        int construct = -1;
        for (int i = 0; i < 6; ++i)
            if (iequals(name, kConstructNames[i])) construct = i;
        if (construct < 0)
            throw ParseError("unknown construct '" + name + "'", name_at, name);
        current_ = kConstructNames[construct];
        if (seen_[construct])
            throw ParseError("duplicate construct", name_at, current_);
        seen_[construct] = true;
        expect('(');
        bool any = false;
        while (true) {
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ')') {
                if (!any) throw ParseError("empty argument list", pos_, current_);
                ++pos_;
                break;
            }
            parse_arg(construct);
            any = true;
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            if (pos_ < text_.size() && text_[pos_] == ')') {
                ++pos_;
                break;
            }
            throw ParseError("expected ',' or ')'", pos_, current_);
        }
    }

    void parse_arg(int construct) {
        skip_ws();
        const std::size_t arg_at = pos_;
        bool negated = false;
        std::string tok;
        bool is_quote = false;
        if (pos_ < text_.size() && text_[pos_] == '"') {
            ++pos_;
            tok = quoted();
            is_quote = true;
        } else {
            tok = ident();
            if (iequals(tok, "NOT")) {
                negated = true;
                if (construct != 1 && construct != 2)
                    throw ParseError("NOT is only allowed in Where and When", arg_at, current_);
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == '"') {
                    ++pos_;
                    tok = quoted();
                    is_quote = true;
                } else {
                    tok = ident();
                }
            }
        }
        if (is_quote && construct != 2)
            throw ParseError("quoted literals are only allowed in When", arg_at, current_);
        switch (construct) {
            case 0: append_unique(ast_.what, tok, arg_at); break;
            case 1: {
                for (const auto& t : ast_.where)
                    if (t.keyword == tok)
                        throw ParseError("duplicate Where keyword '" + tok + "'", arg_at, current_);
                ast_.where.push_back({tok, negated});
                break;
            }
            case 2: {
                WhenTerm term;
                term.keyword = tok;
                term.negated = negated;
                term.is_literal = is_quote;
                if (is_quote) {
                    try {
                        term.literal_window = parse_date_range_literal(tok, warnings_);
                    } catch (const std::invalid_argument& e) {
                        throw ParseError(e.what(), arg_at, current_);
                    }
                }
                for (const auto& t : ast_.when)
                    if (t.keyword == tok && t.is_literal == term.is_literal)
                        throw ParseError("duplicate When term '" + tok + "'", arg_at, current_);
                ast_.when.push_back(std::move(term));
                break;
            }
            case 3: {
                if (ast_.how.size() >= 2)
                    throw ParseError("How accepts at most two keywords (one time, one space)",
                                     arg_at, current_);
                const auto bucket = parse_time_bucket(tok);
                const auto space = parse_space_resolution(tok);
                for (const auto& h : ast_.how) {
                    if (iequals(h, tok))
                        throw ParseError("duplicate How keyword '" + tok + "'", arg_at, current_);
                    if (bucket && parse_time_bucket(h))
                        throw ParseError("How allows only one time-resolution keyword", arg_at,
                                         current_);
                    if (space && parse_space_resolution(h))
                        throw ParseError("How allows only one space-resolution keyword", arg_at,
                                         current_);
                }
                ast_.how.push_back(tok);
                break;
            }
            case 4: append_unique(ast_.whom, tok, arg_at); break;
            case 5: {
                const auto kw = parse_sharing_keyword(tok);
                if (!kw)
                    throw ParseError("unknown sharing keyword '" + tok + "'", arg_at, current_);
                const std::string canon = sharing_keyword_name(*kw);
                for (const auto& w : ast_.who)
                    if (w == canon)
                        throw ParseError("duplicate Who keyword '" + tok + "'", arg_at, current_);
                if (ast_.who.size() >= 2)
                    throw ParseError("Who accepts at most two keywords", arg_at, current_);
                ast_.who.push_back(canon);
                break;
            }
        }
    }

    void append_unique(std::vector<std::string>& list, const std::string& tok, std::size_t at) {
        if (std::find(list.begin(), list.end(), tok) != list.end())
            throw ParseError("duplicate identifier '" + tok + "'", at, current_);
        list.push_back(tok);
    }

    void finish() {
        if (ast_.what.empty() && ast_.whom.empty())
            throw ParseError("policy must have at least What and Whom constructs", text_.size(), "");
        if (ast_.what.empty()) throw ParseError("policy is missing the What construct", text_.size(), "");
        if (ast_.whom.empty()) throw ParseError("policy is missing the Whom construct", text_.size(), "");
    }

    const std::string& text_;
    std::vector<std::string>* warnings_;
    std::size_t pos_ = 0;
    std::string current_;
    bool seen_[6] = {false, false, false, false, false, false};
    PolicyAst ast_;
};

}  // namespace

PolicyAst parse_policy(const std::string& text, std::vector<std::string>* warnings) {
    return PolicyParser(text, warnings).parse();
}

std::string print_policy(const PolicyAst& ast) {
    std::string out;
    auto emit = [&out](const char* name, const std::vector<std::string>& args) {
        if (args.empty()) return;
        if (!out.empty()) out += '.';
        out += name;
        out += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) out += ", ";
            out += args[i];
        }
        out += ')';
    };
    emit("What", ast.what);
    std::vector<std::string> where;
    for (const auto& t : ast.where) where.push_back(t.negated ? "NOT " + t.keyword : t.keyword);
    emit("Where", where);
    std::vector<std::string> when;
    for (const auto& t : ast.when) {
        std::string arg = t.is_literal ? '"' + t.keyword + '"' : t.keyword;
        when.push_back(t.negated ? "NOT " + arg : arg);
    }
    emit("When", when);
    emit("How", ast.how);
    emit("Whom", ast.whom);
    emit("Who", ast.who);
    return out;
}

// ---------------------------------------------------------------------------
// Keyword definitions

namespace {

GeoPoint vertex_from_json(const nlohmann::json& v, bool& saw_object, bool& saw_array) {
    if (v.is_object()) {
        saw_object = true;
        if (!v.contains("lat") || !v.contains("lng"))
            throw std::invalid_argument("polygon vertex object needs \"lat\" and \"lng\"");
        return {v.at("lat").get<double>(), v.at("lng").get<double>()};
    }
    if (v.is_array() && v.size() == 2) {
        saw_array = true;
        // GeoJSON position order: [lng, lat]
        return {v.at(1).get<double>(), v.at(0).get<double>()};
    }
    throw std::invalid_argument("polygon vertex must be {\"lat\":..,\"lng\":..} or [lng, lat]");
}

Polygon polygon_from_json(const nlohmann::json& body) {
    const nlohmann::json* ring = &body;
    if (body.is_object()) {
        // full GeoJSON geometry
        if (body.value("type", "") != "Polygon")
            throw std::invalid_argument("GeoJSON geometry must have type \"Polygon\"");
        const auto& coords = body.at("coordinates");
        if (!coords.is_array() || coords.empty())
            throw std::invalid_argument("GeoJSON Polygon has no rings");
        if (coords.size() > 1)
            throw std::invalid_argument(
                "GeoJSON Polygon has interior rings; only the exterior ring is supported "
                "(express exclusions with NOT instead of holes)");
        ring = &coords.at(0);
    }
    if (!ring->is_array()) throw std::invalid_argument("polygon must be an array of vertices");
    // A single-ring nesting like [[[lng,lat],...]] is also accepted.
    if (ring->size() == 1 && ring->at(0).is_array() && !ring->at(0).empty() &&
        ring->at(0).at(0).is_array())
        ring = &ring->at(0);
    bool saw_object = false, saw_array = false;
    std::vector<GeoPoint> pts;
    pts.reserve(ring->size());
    for (const auto& v : *ring) pts.push_back(vertex_from_json(v, saw_object, saw_array));
    if (saw_object && saw_array)
        throw std::invalid_argument("polygon mixes {lat,lng} and [lng,lat] vertex forms");
    return Polygon(std::move(pts));
}

RecurrenceRule recurrence_from_json(const nlohmann::json& def) {
    RecurrenceRule rule;
    const std::string repeated = def.at("RepeatedHour").get<std::string>();
    const auto dash = repeated.find('-');
    if (dash == std::string::npos)
        throw std::invalid_argument("\"RepeatedHour\" must look like \"9AM-5PM\"");
    rule.start_minutes = parse_clock_minutes(repeated.substr(0, dash));
    rule.end_minutes = parse_clock_minutes(repeated.substr(dash + 1));
    if (def.contains("ExcludeDay")) {
        for (const auto& d : def.at("ExcludeDay"))
            rule.excluded_weekdays.insert(parse_weekday_name(d.get<std::string>()));
    }
    if (def.contains("Timezone")) rule.timezone = parse_timezone(def.at("Timezone").get<std::string>());
    validate_rule(rule);
    return rule;
}

IntervalSet windows_from_json(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.empty())
        throw std::invalid_argument("\"Windows\" must be a non-empty array of {start, end}");
    std::vector<TimeWindow> windows;
    for (const auto& w : arr) {
        if (!w.is_object() || !w.contains("start") || !w.contains("end"))
            throw std::invalid_argument("time window must be {\"start\": int, \"end\": int}");
        windows.push_back({w.at("start").get<std::int64_t>(), w.at("end").get<std::int64_t>()});
    }
    return IntervalSet::from_windows(std::move(windows));
}

}  // namespace

KeywordDef parse_keyword_json(const nlohmann::json& def) {
    if (!def.is_object()) throw std::invalid_argument("keyword definition must be a JSON object");
    KeywordDef out;
    out.name = def.at("Name").get<std::string>();
    if (out.name.empty()) throw std::invalid_argument("keyword \"Name\" must be non-empty");
    for (char c : out.name)
        if (!is_ident_char(c))
            throw std::invalid_argument("keyword name '" + out.name +
                                        "' contains characters the policy language cannot reference");
    if (is_reserved_keyword(out.name))
        throw std::invalid_argument("'" + out.name + "' is a reserved language keyword");
    const std::string type = def.at("Type").get<std::string>();
    if (iequals(type, "Where")) {
        out.kind = KeywordKind::Where;
        if (!def.contains("Polygon"))
            throw std::invalid_argument("Where keyword '" + out.name + "' needs a \"Polygon\"");
        if (def.contains("RepeatedHour") || def.contains("Windows"))
            throw std::invalid_argument("Where keyword '" + out.name + "' has a When-shaped body");
        out.polygon = polygon_from_json(def.at("Polygon"));
    } else if (iequals(type, "When")) {
        out.kind = KeywordKind::When;
        if (def.contains("Polygon"))
            throw std::invalid_argument("When keyword '" + out.name + "' has a Where-shaped body");
        const bool has_rule = def.contains("RepeatedHour");
        const bool has_windows = def.contains("Windows");
        if (has_rule == has_windows)
            throw std::invalid_argument("When keyword '" + out.name +
                                        "' needs exactly one of \"RepeatedHour\" or \"Windows\"");
        if (has_rule)
            out.recurrence = recurrence_from_json(def);
        else
            out.windows = windows_from_json(def.at("Windows"));
    } else {
        throw std::invalid_argument("keyword \"Type\" must be \"Where\" or \"When\", got '" + type + "'");
    }
    return out;
}

KeywordDef KeywordRegistry::register_keyword(const std::string& owner, const nlohmann::json& def,
                                             std::vector<std::string>* warnings) {
    KeywordDef parsed = parse_keyword_json(def);
    std::unique_lock lock(mu_);
    auto& table = by_owner_[owner];
    auto it = table.find(parsed.name);
    if (it != table.end()) {
        parsed.version = it->second.def.version + 1;
        if (warnings)
            warnings->push_back("keyword '" + parsed.name + "' replaced (now version " +
                                std::to_string(parsed.version) + ")");
    }
    table[parsed.name] = RegisteredKeyword{parsed, owner, def.dump()};
    return parsed;
}

std::optional<KeywordDef> KeywordRegistry::find(const std::string& owner,
                                                const std::string& name) const {
    std::shared_lock lock(mu_);
    auto ot = by_owner_.find(owner);
    if (ot == by_owner_.end()) return std::nullopt;
    auto it = ot->second.find(name);
    if (it == ot->second.end()) return std::nullopt;
    return it->second.def;
}

std::optional<std::string> KeywordRegistry::find_original_json(const std::string& owner,
                                                               const std::string& name) const {
    std::shared_lock lock(mu_);
    auto ot = by_owner_.find(owner);
    if (ot == by_owner_.end()) return std::nullopt;
    auto it = ot->second.find(name);
    if (it == ot->second.end()) return std::nullopt;
    return it->second.original_json;
}

std::vector<KeywordDef> KeywordRegistry::list(const std::string& owner) const {
    std::shared_lock lock(mu_);
    std::vector<KeywordDef> out;
    auto ot = by_owner_.find(owner);
    if (ot == by_owner_.end()) return out;
    for (const auto& [_, reg] : ot->second) out.push_back(reg.def);
    return out;
}

nlohmann::json KeywordRegistry::to_json() const {
    std::shared_lock lock(mu_);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [owner, table] : by_owner_) {
        for (const auto& [name, reg] : table) {
            out.push_back({{"owner", owner},
                           {"version", reg.def.version},
                           {"definition", nlohmann::json::parse(reg.original_json)}});
        }
    }
    return out;
}

void KeywordRegistry::load_json(const nlohmann::json& state) {
    std::unique_lock lock(mu_);
    by_owner_.clear();
    for (const auto& entry : state) {
        KeywordDef def = parse_keyword_json(entry.at("definition"));
        def.version = entry.value("version", 1);
        const std::string owner = entry.at("owner").get<std::string>();
        by_owner_[owner][def.name] =
            RegisteredKeyword{def, owner, entry.at("definition").dump()};
    }
}

// ---------------------------------------------------------------------------
// Resolution

ResolvedPolicy resolve_ast(const PolicyAst& ast, const KeywordRegistry& registry,
                           const std::string& owner, bool reparse_definitions) {
    ResolvedPolicy out;
    out.streams = ast.what;
    out.users = ast.whom;

    auto lookup = [&](const std::string& name, const char* construct) -> KeywordDef {
        std::optional<KeywordDef> def;
        if (reparse_definitions) {
            if (auto raw = registry.find_original_json(owner, name))
                def = parse_keyword_json(nlohmann::json::parse(*raw));
        } else {
            def = registry.find(owner, name);
        }
        if (!def) throw ResolveError("unknown keyword '" + name + "'", construct);
        return std::move(*def);
    };

    for (const auto& term : ast.where) {
        KeywordDef def = lookup(term.keyword, "Where");
        if (def.kind != KeywordKind::Where)
            throw ResolveError("keyword '" + term.keyword + "' is a When keyword", "Where");
        out.where.push_back({term.keyword, term.negated, std::move(*def.polygon)});
    }
    for (const auto& term : ast.when) {
        ResolvedWhen rw;
        rw.keyword = term.keyword;
        rw.negated = term.negated;
        if (term.is_literal) {
            rw.literal_window = term.literal_window;
        } else {
            KeywordDef def = lookup(term.keyword, "When");
            if (def.kind != KeywordKind::When)
                throw ResolveError("keyword '" + term.keyword + "' is a Where keyword", "When");
            rw.recurrence = std::move(def.recurrence);
            rw.windows = std::move(def.windows);
        }
        out.when.push_back(std::move(rw));
    }
    for (const auto& h : ast.how) {
        if (auto bucket = parse_time_bucket(h)) {
            if (out.time_resolution)
                throw ResolveError("more than one time-resolution keyword", "How");
            out.time_resolution = bucket;
        } else if (auto space = parse_space_resolution(h)) {
            if (out.space_resolution)
                throw ResolveError("more than one space-resolution keyword", "How");
            out.space_resolution = space;
        } else {
            throw ResolveError("unknown resolution keyword '" + h + "'", "How");
        }
    }
    bool saw_allow = false, saw_deny = false, saw_pue = false;
    for (const auto& w : ast.who) {
        const auto kw = parse_sharing_keyword(w);
        if (!kw) throw ResolveError("unknown sharing keyword '" + w + "'", "Who");
        switch (*kw) {
            case SharingKeyword::AllowDataSharing: saw_allow = true; break;
            case SharingKeyword::DenyDataSharing: saw_deny = true; break;
            case SharingKeyword::PolicyUpdateEffect: saw_pue = true; break;
        }
    }
    if (saw_allow && saw_deny)
        throw ResolveError("AllowDataSharing and DenyDataSharing conflict", "Who");
    if (saw_pue && !saw_allow)
        throw ResolveError("PolicyUpdateEffect is only meaningful with AllowDataSharing", "Who");
    out.sharing.mode = saw_deny ? SharingSpec::Mode::Deny
                                : (saw_allow ? SharingSpec::Mode::Allow : SharingSpec::Mode::Unspecified);
    out.sharing.policy_update_effect = saw_pue;
    return out;
}

}  // namespace streetx
