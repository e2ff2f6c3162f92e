#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "oracles.hpp"
#include "streetx/temporal.hpp"

using namespace streetx;

namespace {

std::int64_t civil_utc(int y, int m, int d, int hh = 0, int mm = 0) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                          std::chrono::day{unsigned(d)}};
    return std::chrono::sys_days{ymd}.time_since_epoch().count() * kSecondsPerDay + hh * 3600 +
           mm * 60;
}

RecurrenceRule working_hours() {
    RecurrenceRule rule;
    rule.start_minutes = parse_clock_minutes("9AM");
    rule.end_minutes = parse_clock_minutes("5PM");
    rule.excluded_weekdays = {parse_weekday_name("saturday"), parse_weekday_name("sunday")};
    return rule;
}

}  // namespace

TEST_CASE("interval set canonicalization") {
    const auto set = IntervalSet::from_windows({{10, 20}, {0, 5}, {5, 8}, {19, 30}});
    REQUIRE(set.size() == 2);
    CHECK(set.windows()[0] == TimeWindow{0, 8});   // touching merged
    CHECK(set.windows()[1] == TimeWindow{10, 30});  // overlapping merged
    // idempotent
    CHECK(IntervalSet::from_windows(set.windows()) == set);
    CHECK_THROWS_AS(IntervalSet::from_windows({{5, 5}}), std::invalid_argument);
}

TEST_CASE("intersect basics") {
    CHECK(intersect(IntervalSet::single(0, 10), IntervalSet::single(5, 20)) ==
          IntervalSet::single(5, 10));
    // end-exclusive: touching intervals share nothing
    CHECK(intersect(IntervalSet::single(0, 10), IntervalSet::single(10, 20)).empty());
}

TEST_CASE("subtract basics") {
    const auto diff = subtract(IntervalSet::single(0, 10), IntervalSet::single(3, 5));
    REQUIRE(diff.size() == 2);
    CHECK(diff.windows()[0] == TimeWindow{0, 3});
    CHECK(diff.windows()[1] == TimeWindow{5, 10});
    const auto a = IntervalSet::from_windows({{0, 4}, {8, 12}});
    CHECK(subtract(a, a).empty());
}

TEST_CASE("union basics") {
    CHECK(unite(IntervalSet::single(0, 5), IntervalSet::single(5, 10)) ==
          IntervalSet::single(0, 10));
    const auto x = IntervalSet::from_windows({{3, 7}, {20, 22}});
    CHECK(unite(IntervalSet{}, x) == x);
}

TEST_CASE("set algebra agrees with the pointwise membership oracle") {
    SplitMix64 rng(4242);
    for (int round = 0; round < 60; ++round) {
        const auto wa = oracle::random_windows(rng, 1 + rng.below(100), 0, 3000);
        const auto wb = oracle::random_windows(rng, 1 + rng.below(100), 0, 3000);
        const auto a = IntervalSet::from_windows(wa);
        const auto b = IntervalSet::from_windows(wb);
        REQUIRE(oracle::equal_by_membership(intersect(a, b), 0, 3000, wa, wb, '&'));
        REQUIRE(oracle::equal_by_membership(unite(a, b), 0, 3000, wa, wb, '|'));
        REQUIRE(oracle::equal_by_membership(subtract(a, b), 0, 3000, wa, wb, '-'));
        // canonical outputs
        for (const auto& set : {intersect(a, b), unite(a, b), subtract(a, b)}) {
            for (std::size_t i = 0; i + 1 < set.size(); ++i) {
                REQUIRE(set.windows()[i].end < set.windows()[i + 1].start);
            }
            for (const auto& w : set.windows()) REQUIRE(w.start < w.end);
        }
    }
}

TEST_CASE("intersects() matches materialized intersection") {
    SplitMix64 rng(99);
    for (int round = 0; round < 200; ++round) {
        const auto a = IntervalSet::from_windows(oracle::random_windows(rng, 1 + rng.below(20), 0, 1000));
        const auto b = IntervalSet::from_windows(oracle::random_windows(rng, 1 + rng.below(20), 0, 1000));
        REQUIRE(a.intersects(b) == !intersect(a, b).empty());
    }
}

TEST_CASE("clock time parsing") {
    CHECK(parse_clock_minutes("9AM") == 9 * 60);
    CHECK(parse_clock_minutes("5PM") == 17 * 60);
    CHECK(parse_clock_minutes("12AM") == 0);
    CHECK(parse_clock_minutes("12PM") == 12 * 60);
    CHECK(parse_clock_minutes("9:30am") == 9 * 60 + 30);
    CHECK(parse_clock_minutes("17:45") == 17 * 60 + 45);
    CHECK_THROWS_AS(parse_clock_minutes("25:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_clock_minutes("13PM"), std::invalid_argument);
    CHECK_THROWS_AS(parse_clock_minutes("banana"), std::invalid_argument);
}

TEST_CASE("timezone parsing") {
    CHECK(parse_timezone("UTC").offset_seconds == 0);
    CHECK(parse_timezone("UTC+05:30").offset_seconds == 5 * 3600 + 30 * 60);
    CHECK(parse_timezone("UTC-08").offset_seconds == -8 * 3600);
    CHECK_THROWS_AS(parse_timezone("America/Los_Angeles"), std::invalid_argument);
}

TEST_CASE("expand_recurrence: one work week gives five 8-hour windows") {
    // 2016-11-07 was a Monday.
    const std::int64_t monday = civil_utc(2016, 11, 7);
    const TimeWindow span{monday, monday + 5 * kSecondsPerDay};
    const auto set = expand_recurrence(working_hours(), span);
    REQUIRE(set.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const auto& w = set.windows()[i];
        CHECK(w.start == monday + std::int64_t(i) * kSecondsPerDay + 9 * 3600);
        CHECK(w.end - w.start == 8 * 3600);
    }
    CHECK(set.total_seconds() == 5 * 8 * 3600);
}

TEST_CASE("expand_recurrence: weekend-only span and full exclusion") {
    RecurrenceRule all_excluded = working_hours();
    for (unsigned d = 0; d < 7; ++d) all_excluded.excluded_weekdays.insert(d);
    const std::int64_t monday = civil_utc(2016, 11, 7);
    CHECK(expand_recurrence(all_excluded, {monday, monday + 30 * kSecondsPerDay}).empty());

    // span entirely inside an excluded Saturday (2016-11-12)
    const std::int64_t saturday = civil_utc(2016, 11, 12);
    CHECK(expand_recurrence(working_hours(), {saturday + 3600, saturday + 7200}).empty());
}

TEST_CASE("expand_recurrence: clipping, timezones, weekday membership oracle") {
    const std::int64_t monday = civil_utc(2016, 11, 7);
    // span starts mid-window Monday 10AM
    const auto clipped =
        expand_recurrence(working_hours(), {monday + 10 * 3600, monday + kSecondsPerDay});
    REQUIRE(clipped.size() == 1);
    CHECK(clipped.windows()[0] == TimeWindow{monday + 10 * 3600, monday + 17 * 3600});

    // +05:30 zone shifts window starts by -05:30 in UTC
    RecurrenceRule offset_rule = working_hours();
    offset_rule.timezone = parse_timezone("UTC+05:30");
    const auto shifted = expand_recurrence(offset_rule, {monday, monday + kSecondsPerDay});
    REQUIRE(!shifted.empty());
    CHECK(shifted.windows()[0].start % kSecondsPerDay ==
          (9 * 3600 - (5 * 3600 + 30 * 60) + kSecondsPerDay) % kSecondsPerDay);

    // calendar-oracle check over ten years: each window lies within one local
    // day, on a non-excluded weekday, with the rule's clock bounds
    SplitMix64 rng(7);
    RecurrenceRule rule = working_hours();
    const std::int64_t start = civil_utc(2014, 1, 1) + std::int64_t(rng.below(86400));
    const TimeWindow span{start, start + 365 * kSecondsPerDay};
    const auto set = expand_recurrence(rule, span);
    std::int64_t prev_end = span.start - 1;
    std::size_t full_windows = 0;
    for (const auto& w : set.windows()) {
        REQUIRE(w.start > prev_end);  // disjoint, non-touching
        prev_end = w.end;
        REQUIRE(w.start >= span.start);
        REQUIRE(w.end <= span.end);
        const std::int64_t day = floor_div(w.start, kSecondsPerDay);
        REQUIRE(day == floor_div(w.end - 1, kSecondsPerDay));  // one calendar day
        const unsigned wd = weekday_of_unix_day(day);
        REQUIRE(wd != parse_weekday_name("saturday"));
        REQUIRE(wd != parse_weekday_name("sunday"));
        if (w.end - w.start == 8 * 3600) ++full_windows;
    }
    CHECK(full_windows >= 259);  // 52 weeks of 5 workdays, allowing clipped ends
}

TEST_CASE("expand_recurrence enforces the span cap") {
    const TimeWindow huge{0, 11LL * 366 * kSecondsPerDay};
    CHECK_THROWS_AS(expand_recurrence(working_hours(), huge), ExpansionTooLarge);
    CHECK_NOTHROW(expand_recurrence(working_hours(), {0, 100 * kSecondsPerDay}));
}

TEST_CASE("rule validation") {
    RecurrenceRule bad = working_hours();
    bad.start_minutes = bad.end_minutes;
    CHECK_THROWS_AS(validate_rule(bad), std::invalid_argument);
    CHECK_THROWS_AS(parse_weekday_name("caturday"), std::invalid_argument);
}

TEST_CASE("weekday encoding matches std::chrono") {
    CHECK(weekday_of_unix_day(0) == 4);  // 1970-01-01 was Thursday
    for (std::int64_t day : {-1000LL, -1LL, 0LL, 1LL, 17000LL}) {
        const auto wd = std::chrono::weekday{std::chrono::sys_days{std::chrono::days{day}}};
        CHECK(weekday_of_unix_day(day) == wd.c_encoding());
    }
}
