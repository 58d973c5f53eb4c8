// Copyright 2026 The tourhmm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tourhmm/ingest.hpp"

#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace tourhmm::ingest {
namespace {

using std::chrono::days;

const Date kDay0 = Date{std::chrono::year{2020} / 1 / 1};

Review review(const std::string& user, Item area, int day) {
  return Review{user, area, kDay0 + days{day}, std::nullopt};
}

Stay stay(std::vector<std::pair<int, Item>> visits) {
  Stay s{"u", {}};
  for (auto [day, area] : visits) s.visits.push_back({kDay0 + days{day}, area});
  return s;
}

std::vector<int> day_numbers(const Stay& s) {
  std::vector<int> out;
  for (const auto& v : s.visits) out.push_back((v.date - kDay0).count());
  return out;
}

TEST(ParseDateTest, AcceptsCalendarDaysOnly) {
  EXPECT_TRUE(parse_iso_date("2019-12-31"));
  EXPECT_TRUE(parse_iso_date("2020-02-29"));
  EXPECT_FALSE(parse_iso_date("2019-02-29"));
  EXPECT_FALSE(parse_iso_date("2019-13-01"));
  EXPECT_FALSE(parse_iso_date("2019-1-01"));
  EXPECT_FALSE(parse_iso_date("yesterday"));
}

TEST(ParseReviewsTest, CollectsLineErrorsAndSkipsMissingAreas) {
  std::istringstream in(
      R"({"user":"a","area":3,"date":"2020-01-01","rating":5})"
      "\n"
      R"({"user":"a","area":4,"date":"2020-02-30"})"
      "\n"
      "not json\n"
      "\n"
      R"({"user":"b","date":"2020-01-02"})"
      "\n"
      R"({"user":7,"area":"2","date":"2020-01-03"})"
      "\n");
  const auto parsed = parse_reviews_jsonl(in);
  ASSERT_EQ(parsed.reviews.size(), 2u);
  EXPECT_EQ(parsed.reviews[0].rating, 5);
  EXPECT_EQ(parsed.reviews[1].user_id, "7");
  EXPECT_EQ(parsed.reviews[1].area_id, 2);
  EXPECT_EQ(parsed.lines_read, 5u);
  ASSERT_EQ(parsed.errors.size(), 2u);
  EXPECT_EQ(parsed.errors[0].line, 2u);
  EXPECT_EQ(parsed.errors[1].line, 3u);
  EXPECT_EQ(parsed.missing_area, 1u);
  EXPECT_EQ(parsed.skipped(), 3u);
}

TEST(ParseReviewsTest, AllowListFiltersUsers) {
  std::istringstream in(R"({"user":"a","area":1,"date":"2020-01-01"})"
                        "\n"
                        R"({"user":"b","area":1,"date":"2020-01-01"})"
                        "\n");
  IngestConfig cfg;
  cfg.user_allow_list = {"b"};
  const auto parsed = parse_reviews_jsonl(in, cfg);
  ASSERT_EQ(parsed.reviews.size(), 1u);
  EXPECT_EQ(parsed.reviews[0].user_id, "b");
  EXPECT_EQ(parsed.filtered_users, 1u);
}

TEST(BuildTimelinesTest, SortsOneUserByDate) {
  const auto t = build_timelines({review("a", 1, 5), review("a", 2, 1), review("a", 3, 3)});
  ASSERT_EQ(t.size(), 1u);
  const auto& line = t.at("a");
  ASSERT_EQ(line.size(), 3u);
  EXPECT_EQ(line[0].area_id, 2);
  EXPECT_EQ(line[1].area_id, 3);
  EXPECT_EQ(line[2].area_id, 1);
}

TEST(BuildTimelinesTest, EmptyInput) { EXPECT_TRUE(build_timelines({}).empty()); }

TEST(BuildTimelinesTest, InterleavedUsersMatchPerUserSort) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> day(0, 30);
  std::vector<Review> reviews;
  for (int i = 0; i < 60; ++i) reviews.push_back(review(i % 2 ? "x" : "y", i, day(rng)));
  const auto t = build_timelines(reviews);
  ASSERT_EQ(t.size(), 2u);
  for (const auto& user : {"x", "y"}) {
    // Reference: filter, then stable sort by day.
    std::vector<Review> expected;
    for (const auto& r : reviews) {
      if (r.user_id == user) expected.push_back(r);
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const Review& a, const Review& b) { return a.date < b.date; });
    ASSERT_EQ(t.at(user).size(), expected.size());
    for (std::size_t k = 0; k < expected.size(); ++k) {
      EXPECT_EQ(t.at(user)[k].area_id, expected[k].area_id);
    }
  }
}

TEST(SegmentStaysTest, GapLargerThanThresholdSplits) {
  const auto stays = segment_stays({review("u", 0, 0), review("u", 1, 1), review("u", 2, 9)}, {});
  ASSERT_EQ(stays.size(), 2u);
  EXPECT_EQ(day_numbers(stays[0]), (std::vector<int>{0, 1}));
  EXPECT_EQ(day_numbers(stays[1]), (std::vector<int>{9}));
}

TEST(SegmentStaysTest, GapEqualToThresholdKeepsStay) {
  const auto stays = segment_stays({review("u", 0, 0), review("u", 1, 7)}, {});
  ASSERT_EQ(stays.size(), 1u);
  EXPECT_EQ(stays[0].duration_days(), 8);
}

TEST(SegmentStaysTest, SameDayDuplicatesCollapse) {
  const std::vector<Review> line = {review("u", 4, 0), review("u", 4, 0), review("u", 5, 0),
                                    review("u", 4, 1)};
  EXPECT_EQ(segment_stays(line, {})[0].visits.size(), 3u);
  IngestConfig keep;
  keep.dedupe_same_day = false;
  EXPECT_EQ(segment_stays(line, keep)[0].visits.size(), 4u);
}

TEST(SegmentStaysTest, RandomDatesMatchGapScan) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> day(0, 120);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> days(20);
    for (auto& d : days) d = day(rng);
    std::sort(days.begin(), days.end());
    std::vector<Review> line;
    for (std::size_t i = 0; i < days.size(); ++i) line.push_back(review("u", static_cast<Item>(i), days[i]));

    const auto stays = segment_stays(line, {});
    const auto expected = oracle::gap_scan(days, 7);
    ASSERT_EQ(stays.size(), expected.size());
    for (std::size_t k = 0; k < stays.size(); ++k) EXPECT_EQ(day_numbers(stays[k]), expected[k]);
  }
}

TEST(SegmentStaysTest, RejectsNonPositiveThreshold) {
  IngestConfig cfg;
  cfg.break_threshold_days = 0;
  EXPECT_THROW(segment_stays({review("u", 0, 0)}, cfg), std::invalid_argument);
}

TEST(MergeStaysTest, ShortBreakWithSharedEndpointMerges) {
  // Durations 3 and 4 around a 2-day break, both ends at area 5.
  const Stay a = stay({{0, 1}, {1, 0}, {2, 5}});
  const Stay b = stay({{5, 5}, {6, 2}, {8, 3}});
  ASSERT_EQ(a.duration_days(), 3);
  ASSERT_EQ(b.duration_days(), 4);
  ASSERT_EQ(break_days(a, b), 2);
  const auto r = merge_stays({a, b});
  ASSERT_EQ(r.stays.size(), 1u);
  EXPECT_EQ(r.merges, 1u);
  EXPECT_EQ(r.stays[0].visits.size(), 6u);
}

TEST(MergeStaysTest, BreakLongerThanStayDoesNotMerge) {
  const Stay a = stay({{0, 1}, {2, 5}});         // 3 days
  const Stay b = stay({{8, 5}, {20, 2}});        // break of 5 days
  ASSERT_EQ(break_days(a, b), 5);
  EXPECT_EQ(merge_stays({a, b}).stays.size(), 2u);
}

TEST(MergeStaysTest, DifferentEndpointsDoNotMerge) {
  const Stay a = stay({{0, 1}, {2, 4}});
  const Stay b = stay({{4, 5}, {6, 2}});
  ASSERT_EQ(break_days(a, b), 1);
  EXPECT_EQ(merge_stays({a, b}).stays.size(), 2u);
}

TEST(MergeStaysTest, SingleDayStayNeedsBreakOfAtMostOne) {
  EXPECT_TRUE(should_merge(stay({{0, 1}}), stay({{2, 1}, {3, 2}})));
  EXPECT_FALSE(should_merge(stay({{0, 1}}), stay({{3, 1}, {4, 2}})));
}

TEST(MergeStaysTest, MergesCascade) {
  // The 3-day break to the last stay exceeds the middle stay alone, but not
  // the stay it has grown into.
  const Stay a = stay({{0, 1}, {5, 2}});
  const Stay b = stay({{8, 2}, {9, 3}});
  const Stay c = stay({{13, 3}, {15, 4}});
  ASSERT_FALSE(should_merge(b, c));
  const auto r = merge_stays({a, b, c});
  ASSERT_EQ(r.stays.size(), 1u);
  EXPECT_EQ(r.merges, 2u);
}

TEST(MergeStaysTest, PropertiesOnRandomStays) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> gap(1, 6);
  std::uniform_int_distribution<int> len(1, 5);
  std::uniform_int_distribution<Item> area(0, 2);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Stay> stays;
    int day = 0;
    for (int s = 0; s < 6; ++s) {
      Stay st{"u", {}};
      const int visits = len(rng);
      for (int v = 0; v < visits; ++v) {
        st.visits.push_back({kDay0 + days{day}, area(rng)});
        day += 1;
      }
      day += gap(rng);
      stays.push_back(st);
    }
    std::vector<Visit> flat_before;
    for (const auto& s : stays) flat_before.insert(flat_before.end(), s.visits.begin(), s.visits.end());

    const auto once = merge_stays(stays);
    EXPECT_LE(once.stays.size(), stays.size());
    EXPECT_EQ(once.stays.size() + once.merges, stays.size());
    std::vector<Visit> flat_after;
    for (const auto& s : once.stays) flat_after.insert(flat_after.end(), s.visits.begin(), s.visits.end());
    EXPECT_EQ(flat_before, flat_after);

    const auto twice = merge_stays(once.stays);
    EXPECT_EQ(twice.stays, once.stays);
    EXPECT_EQ(twice.merges, 0u);
  }
}

TEST(ExtractSequencesTest, ItemsInVisitOrder) {
  const auto e = extract_sequences({stay({{0, 0}, {1, 5}, {2, 2}})}, {});
  ASSERT_EQ(e.sequences.size(), 1u);
  EXPECT_EQ(e.sequences[0], (Sequence{0, 5, 2}));
}

TEST(ExtractSequencesTest, SingleVisitDropped) {
  const auto e = extract_sequences({stay({{0, 3}})}, {});
  EXPECT_TRUE(e.sequences.empty());
  EXPECT_EQ(e.dropped, 1u);
}

TEST(ExtractSequencesTest, KeptPlusDroppedIsConserved) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> len(1, 4);
  std::vector<Stay> stays;
  for (int i = 0; i < 100; ++i) {
    std::vector<std::pair<int, Item>> v;
    for (int k = len(rng); k > 0; --k) v.push_back({k, k});
    stays.push_back(stay(v));
  }
  const auto e = extract_sequences(stays, {});
  EXPECT_EQ(e.sequences.size() + e.dropped, 100u);
}

TEST(RunIngestTest, EveryReviewLandsInExactlyOneStay) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> day(0, 200);
  std::uniform_int_distribution<Item> area(0, 5);
  ParsedReviews parsed;
  for (int i = 0; i < 300; ++i) {
    parsed.reviews.push_back(review(std::to_string(i % 7), area(rng), day(rng)));
  }
  IngestConfig cfg;
  cfg.dedupe_same_day = false;
  std::size_t visits = 0;
  for (const auto& [user, line] : build_timelines(parsed.reviews)) {
    for (const auto& s : merge_stays(segment_stays(line, cfg)).stays) visits += s.visits.size();
  }
  EXPECT_EQ(visits, parsed.reviews.size());

  cfg.min_sequence_length = 1;
  const auto result = run_ingest(parsed, cfg);
  std::size_t items = 0;
  for (const auto& s : result.sequences) items += s.size();
  EXPECT_EQ(items, parsed.reviews.size());
  EXPECT_EQ(result.report.stays, result.sequences.size());
}

}  // namespace
}  // namespace tourhmm::ingest
