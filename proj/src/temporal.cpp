#include "streetx/temporal.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace streetx {

void validate_window(const TimeWindow& w) {
    if (w.start >= w.end)
        throw std::invalid_argument("time window start must be before end (got [" +
                                    std::to_string(w.start) + ", " + std::to_string(w.end) + "))");
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

IntervalSet IntervalSet::from_windows(std::vector<TimeWindow> windows) {
    for (const auto& w : windows) validate_window(w);
    std::sort(windows.begin(), windows.end(),
              [](const TimeWindow& a, const TimeWindow& b) { return a.start < b.start; });
    IntervalSet out;
    for (const auto& w : windows) {
        if (!out.windows_.empty() && w.start <= out.windows_.back().end)
            out.windows_.back().end = std::max(out.windows_.back().end, w.end);
        else
            out.windows_.push_back(w);
    }
    return out;
}

IntervalSet IntervalSet::single(std::int64_t start, std::int64_t end) {
    return from_windows({TimeWindow{start, end}});
}

bool IntervalSet::contains(std::int64_t t) const {
    auto it = std::upper_bound(windows_.begin(), windows_.end(), t,
                               [](std::int64_t v, const TimeWindow& w) { return v < w.start; });
    if (it == windows_.begin()) return false;
    --it;
    return t < it->end;
}

std::int64_t IntervalSet::total_seconds() const {
    std::int64_t total = 0;
    for (const auto& w : windows_) total += w.end - w.start;
    return total;
}

bool IntervalSet::intersects(const IntervalSet& other) const {
    std::size_t i = 0, j = 0;
    while (i < windows_.size() && j < other.windows_.size()) {
        const auto& a = windows_[i];
        const auto& b = other.windows_[j];
        if (a.start < b.end && b.start < a.end) return true;
        if (a.end <= b.end) ++i; else ++j;
    }
    return false;
}

IntervalSet intersect(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    std::size_t i = 0, j = 0;
    while (i < a.windows_.size() && j < b.windows_.size()) {
        const std::int64_t lo = std::max(a.windows_[i].start, b.windows_[j].start);
        const std::int64_t hi = std::min(a.windows_[i].end, b.windows_[j].end);
        if (lo < hi) out.windows_.push_back({lo, hi});
        if (a.windows_[i].end <= b.windows_[j].end) ++i; else ++j;
    }
    return out;  // pieces of a canonical set stay canonical
}

IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
    std::vector<TimeWindow> all = a.windows_;
    all.insert(all.end(), b.windows_.begin(), b.windows_.end());
    return IntervalSet::from_windows(std::move(all));
}

IntervalSet subtract(const IntervalSet& a, const IntervalSet& b) {
    IntervalSet out;
    std::size_t j = 0;
    for (const auto& w : a.windows_) {
        std::int64_t cursor = w.start;
        while (j < b.windows_.size() && b.windows_[j].end <= cursor) ++j;
        std::size_t k = j;
        while (k < b.windows_.size() && b.windows_[k].start < w.end) {
            if (b.windows_[k].start > cursor)
                out.windows_.push_back({cursor, b.windows_[k].start});
            cursor = std::max(cursor, b.windows_[k].end);
            if (cursor >= w.end) break;
            ++k;
        }
        if (cursor < w.end) out.windows_.push_back({cursor, w.end});
    }
    return out;
}

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

int parse_clock_minutes(const std::string& text) {
    const std::string s = lowercase(text);
    if (s.empty()) throw std::invalid_argument("empty clock time");
    int ampm = 0;  // 0 none, 1 am, 2 pm
    std::string digits = s;
    if (s.size() >= 2 && (s.ends_with("am") || s.ends_with("pm"))) {
        ampm = s.ends_with("am") ? 1 : 2;
        digits = s.substr(0, s.size() - 2);
    }
    const auto colon = digits.find(':');
    int hour = 0, minute = 0;
    try {
        std::size_t used = 0;
        hour = std::stoi(digits.substr(0, colon), &used);
        if (used != (colon == std::string::npos ? digits.size() : colon))
            throw std::invalid_argument("trailing characters");
        if (colon != std::string::npos) {
            const std::string mm = digits.substr(colon + 1);
            minute = std::stoi(mm, &used);
            if (used != mm.size() || mm.empty()) throw std::invalid_argument("bad minutes");
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed clock time '" + text + "'");
    }
    if (minute < 0 || minute > 59) throw std::invalid_argument("clock minutes out of range in '" + text + "'");
    if (ampm != 0) {
        if (hour < 1 || hour > 12) throw std::invalid_argument("clock hour out of range in '" + text + "'");
        if (hour == 12) hour = 0;
        if (ampm == 2) hour += 12;
    } else {
        if (hour < 0 || hour > 23) throw std::invalid_argument("clock hour out of range in '" + text + "'");
    }
    return hour * 60 + minute;
}

TimeZoneSpec parse_timezone(const std::string& name) {
    const std::string s = lowercase(name);
    if (s == "utc" || s == "z" || s.empty()) return TimeZoneSpec{"UTC", 0};
    if (s.rfind("utc", 0) == 0 && s.size() > 3 && (s[3] == '+' || s[3] == '-')) {
        const int sign = s[3] == '-' ? -1 : 1;
        const std::string rest = s.substr(4);
        const auto colon = rest.find(':');
        int hh = 0, mm = 0;
        try {
            hh = std::stoi(rest.substr(0, colon));
            if (colon != std::string::npos) mm = std::stoi(rest.substr(colon + 1));
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed timezone offset '" + name + "'");
        }
        if (hh < 0 || hh > 14 || mm < 0 || mm > 59)
            throw std::invalid_argument("timezone offset out of range '" + name + "'");
        return TimeZoneSpec{name, sign * (hh * 3600LL + mm * 60LL)};
    }
    throw std::invalid_argument(
        "unsupported timezone '" + name +
        "' (this build supports \"UTC\" and fixed offsets \"UTC+HH[:MM]\" / \"UTC-HH[:MM]\")");
}

unsigned weekday_of_unix_day(std::int64_t days_since_epoch) {
    // 1970-01-01 was a Thursday (c_encoding 4).
    return static_cast<unsigned>(((days_since_epoch + 4) % 7 + 7) % 7);
}

namespace {
const char* const kWeekdayNames[7] = {"sunday",   "monday", "tuesday", "wednesday",
                                      "thursday", "friday", "saturday"};
}

unsigned parse_weekday_name(const std::string& name) {
    const std::string s = lowercase(name);
    for (unsigned i = 0; i < 7; ++i)
        if (s == kWeekdayNames[i]) return i;
    throw std::invalid_argument("unknown weekday name '" + name + "'");
}

const char* weekday_name(unsigned c_encoding) {
    if (c_encoding > 6) throw std::invalid_argument("weekday encoding out of range");
    return kWeekdayNames[c_encoding];
}

void validate_rule(const RecurrenceRule& rule) {
    if (rule.start_minutes < 0 || rule.start_minutes >= 1440 ||
        rule.end_minutes <= 0 || rule.end_minutes > 1440)
        throw std::invalid_argument("recurrence clock times must lie within one day");
    if (rule.start_minutes >= rule.end_minutes)
        throw std::invalid_argument("recurrence daily start must be earlier than daily end");
    for (unsigned d : rule.excluded_weekdays)
        if (d > 6) throw std::invalid_argument("excluded weekday encoding out of range");
}

IntervalSet expand_recurrence(const RecurrenceRule& rule, const TimeWindow& span,
                              std::int64_t cap_seconds) {
    validate_rule(rule);
    validate_window(span);
    if (span.end - span.start > cap_seconds)
        throw ExpansionTooLarge("recurrence expansion span of " +
                                std::to_string(span.end - span.start) +
                                " s exceeds the cap of " + std::to_string(cap_seconds) + " s");
    const std::int64_t off = rule.timezone.offset_seconds;
    const std::int64_t first_day = floor_div(span.start + off, kSecondsPerDay);
    const std::int64_t last_day = floor_div(span.end - 1 + off, kSecondsPerDay);
    std::vector<TimeWindow> out;
    for (std::int64_t day = first_day; day <= last_day; ++day) {
        if (rule.excluded_weekdays.count(weekday_of_unix_day(day))) continue;
        const std::int64_t ws = day * kSecondsPerDay + rule.start_minutes * 60 - off;
        const std::int64_t we = day * kSecondsPerDay + rule.end_minutes * 60 - off;
        const std::int64_t lo = std::max(ws, span.start);
        const std::int64_t hi = std::min(we, span.end);
        if (lo < hi) out.push_back({lo, hi});
    }
    return IntervalSet::from_windows(std::move(out));
}

}  // namespace streetx
