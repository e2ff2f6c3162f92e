#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace streetx {

// Half-open UNIX-second interval [start, end).
struct TimeWindow {
    std::int64_t start = 0;
    std::int64_t end = 0;

    bool contains(std::int64_t t) const { return t >= start && t < end; }

    friend bool operator==(const TimeWindow& a, const TimeWindow& b) {
        return a.start == b.start && a.end == b.end;
    }
};

// Throws std::invalid_argument unless start < end.
void validate_window(const TimeWindow& w);

/// Canonical set of half-open time windows: sorted by start, pairwise
/// disjoint, touching windows merged. The canonical form is established by
/// the factory functions and preserved by every operation.
class IntervalSet {
public:
    IntervalSet() = default;

    // Canonicalizes arbitrary input windows (each must satisfy start < end).
    static IntervalSet from_windows(std::vector<TimeWindow> windows);
    static IntervalSet single(std::int64_t start, std::int64_t end);

    bool empty() const { return windows_.empty(); }
    std::size_t size() const { return windows_.size(); }
    const std::vector<TimeWindow>& windows() const { return windows_; }
    bool contains(std::int64_t t) const;
    std::int64_t total_seconds() const;
    // Cheap emptiness test for the intersection, without materializing it.
    bool intersects(const IntervalSet& other) const;

    friend IntervalSet intersect(const IntervalSet& a, const IntervalSet& b);
    friend IntervalSet unite(const IntervalSet& a, const IntervalSet& b);
    friend IntervalSet subtract(const IntervalSet& a, const IntervalSet& b);

    friend bool operator==(const IntervalSet& a, const IntervalSet& b) {
        return a.windows_ == b.windows_;
    }

private:
    std::vector<TimeWindow> windows_;
};

// Minutes since local midnight, in [0, 1440). Accepts "9AM", "12PM",
// "9:30AM", and 24-hour "17:00" forms.
int parse_clock_minutes(const std::string& text);

// "UTC" or a fixed offset "UTC+HH[:MM]" / "UTC-HH[:MM]". This build has no
// IANA tz database, so DST-shifting zone names are rejected.
struct TimeZoneSpec {
    std::string name = "UTC";
    std::int64_t offset_seconds = 0;
};

TimeZoneSpec parse_timezone(const std::string& name);

// Weekday encoding follows std::chrono::weekday::c_encoding(): 0 = Sunday.
unsigned weekday_of_unix_day(std::int64_t days_since_epoch);
unsigned parse_weekday_name(const std::string& name);
const char* weekday_name(unsigned c_encoding);

/// Daily recurring window ("9AM-5PM" excluding some weekdays), evaluated on
/// the wall clock of its timezone.
struct RecurrenceRule {
    int start_minutes = 0;  // minutes since local midnight
    int end_minutes = 0;    // must exceed start_minutes, within one day
    std::set<unsigned> excluded_weekdays;  // c_encoding values
    TimeZoneSpec timezone;
};

// Throws std::invalid_argument on a rule violating its invariants.
void validate_rule(const RecurrenceRule& rule);

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr std::int64_t kDefaultExpansionCapSeconds = 10LL * 366 * kSecondsPerDay;

struct ExpansionTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One window per non-excluded calendar day of the rule's timezone that
// intersects `span`, clipped to `span`. Spans longer than `cap_seconds`
// throw ExpansionTooLarge.
IntervalSet expand_recurrence(const RecurrenceRule& rule, const TimeWindow& span,
                              std::int64_t cap_seconds = kDefaultExpansionCapSeconds);

std::int64_t floor_div(std::int64_t a, std::int64_t b);

}  // namespace streetx
