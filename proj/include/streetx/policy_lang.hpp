#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "streetx/geometry.hpp"
#include "streetx/temporal.hpp"

#include <nlohmann/json_fwd.hpp>

namespace streetx {

// ---------------------------------------------------------------------------
// Reserved language vocabulary

enum class TimeBucket { Second, Minute, Hour, Day, Week, Month, Year };

std::int64_t bucket_seconds(TimeBucket b);  // Month/Year are calendar-sized; throws for those
const char* bucket_name(TimeBucket b);
std::optional<TimeBucket> parse_time_bucket(const std::string& name);  // case-insensitive

// Reserved space-resolution names: ZipCodes, County, City, Country.
// Returns the canonical spelling, or nullopt if the name is not reserved.
std::optional<std::string> parse_space_resolution(const std::string& name);

enum class SharingKeyword { AllowDataSharing, DenyDataSharing, PolicyUpdateEffect };
std::optional<SharingKeyword> parse_sharing_keyword(const std::string& name);
const char* sharing_keyword_name(SharingKeyword k);

// True for NOT and every Table-3 reserved keyword, case-insensitively.
bool is_reserved_keyword(const std::string& name);

// ---------------------------------------------------------------------------
// Policy AST

struct WhereTerm {
    std::string keyword;
    bool negated = false;
    friend bool operator==(const WhereTerm&, const WhereTerm&) = default;
};

struct WhenTerm {
    std::string keyword;     // keyword name, or the quoted literal text verbatim
    bool negated = false;
    bool is_literal = false;
    TimeWindow literal_window;  // resolved [start, end) when is_literal
    friend bool operator==(const WhenTerm&, const WhenTerm&) = default;
};

struct PolicyAst {
    std::vector<std::string> what;   // stream ids, non-empty
    std::vector<WhereTerm> where;
    std::vector<WhenTerm> when;
    std::vector<std::string> how;    // 0..2 resolution keywords as written
    std::vector<std::string> whom;   // user ids, non-empty
    std::vector<std::string> who;    // 0..2 sharing keywords, canonical spelling
    friend bool operator==(const PolicyAst&, const PolicyAst&) = default;
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t offset, std::string construct)
        : std::runtime_error("parse error at byte " + std::to_string(offset) +
                             (construct.empty() ? "" : " in construct '" + construct + "'") +
                             ": " + msg),
          offset(offset),
          construct(std::move(construct)) {}
    std::size_t offset;
    std::string construct;
};

// Parses the construct-chain surface syntax, e.g.
//   What(d_h).Where(LA, NOT HOME).When(WorkingHours).How(Hour).Whom(u_b).Who(DenyDataSharing)
// Construct order is free; construct names are case-insensitive. Non-fatal
// notes (like clamping "11/31/2016" to the month's last day) are appended to
// *warnings when given.
PolicyAst parse_policy(const std::string& text, std::vector<std::string>* warnings = nullptr);

// Canonical text form (constructs ordered What, Where, When, How, Whom, Who).
// parse_policy(print_policy(ast)) == ast.
std::string print_policy(const PolicyAst& ast);

// Inline When date literal "M/D/YYYY-M/D/YYYY", end date inclusive through
// end-of-day, interpreted in UTC. Out-of-range day-of-month clamps to the
// month's last day with a warning.
TimeWindow parse_date_range_literal(const std::string& literal,
                                    std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// User-defined keywords (Table 2 style JSON definitions)

enum class KeywordKind { Where, When };

struct KeywordDef {
    std::string name;
    KeywordKind kind = KeywordKind::Where;
    int version = 1;
    // Where body
    std::optional<Polygon> polygon;
    // When body: exactly one of the two
    std::optional<RecurrenceRule> recurrence;
    std::optional<IntervalSet> windows;
};

// Parses and validates a Table-2 keyword definition. Accepted polygon forms:
// the {"lat":..,"lng":..} object list, a GeoJSON-style [[lng,lat],...] ring,
// or a full GeoJSON Polygon geometry (single exterior ring only; holes are
// rejected). Mixed vertex forms in one array are rejected.
KeywordDef parse_keyword_json(const nlohmann::json& def);

struct RegisteredKeyword {
    KeywordDef def;
    std::string owner;
    std::string original_json;  // verbatim definition, kept for persistence and re-translation
};

/// Per-owner keyword namespaces. User keyword names are case-sensitive;
/// reserved names are refused case-insensitively. Reads are concurrent,
/// writes serialized.
class KeywordRegistry {
public:
    // Returns the stored definition; re-registering an existing name replaces
    // it with a bumped version and appends a warning.
    KeywordDef register_keyword(const std::string& owner, const nlohmann::json& def,
                                std::vector<std::string>* warnings = nullptr);

    std::optional<KeywordDef> find(const std::string& owner, const std::string& name) const;
    std::optional<std::string> find_original_json(const std::string& owner,
                                                  const std::string& name) const;
    std::vector<KeywordDef> list(const std::string& owner) const;

    // Persistence hooks for the catalog file.
    nlohmann::json to_json() const;
    void load_json(const nlohmann::json& state);

private:
    mutable std::shared_mutex mu_;
    std::map<std::string, std::map<std::string, RegisteredKeyword>> by_owner_;
};

// ---------------------------------------------------------------------------
// Resolution of an AST against a registry

struct ResolvedWhere {
    std::string keyword;
    bool negated = false;
    Polygon polygon;
};

struct ResolvedWhen {
    std::string keyword;  // keyword name or literal text
    bool negated = false;
    // exactly one of the three bodies
    std::optional<RecurrenceRule> recurrence;
    std::optional<IntervalSet> windows;
    std::optional<TimeWindow> literal_window;
};

struct SharingSpec {
    enum class Mode { Unspecified, Allow, Deny };
    Mode mode = Mode::Unspecified;
    bool policy_update_effect = false;
    friend bool operator==(const SharingSpec&, const SharingSpec&) = default;
};

const char* sharing_mode_name(SharingSpec::Mode mode);

struct ResolvedPolicy {
    std::vector<std::string> streams;
    std::vector<std::string> users;
    std::vector<ResolvedWhere> where;
    std::vector<ResolvedWhen> when;
    std::optional<TimeBucket> time_resolution;
    std::optional<std::string> space_resolution;  // canonical reserved name
    SharingSpec sharing;
};

struct ResolveError : std::runtime_error {
    ResolveError(const std::string& msg, std::string construct)
        : std::runtime_error("cannot resolve policy: " + msg + " (construct '" + construct + "')"),
          construct(std::move(construct)) {}
    std::string construct;
};

// Replaces every keyword reference with its registered definition and
// validates the reserved How/Who vocabulary. When `reparse_definitions` is
// set, Where/When bodies are rebuilt from their stored JSON instead of the
// cached validated objects (the uncached translation path).
ResolvedPolicy resolve_ast(const PolicyAst& ast, const KeywordRegistry& registry,
                           const std::string& owner, bool reparse_definitions = false);

}  // namespace streetx
