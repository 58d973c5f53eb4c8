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

#ifndef TOURHMM_INGEST_HPP_
#define TOURHMM_INGEST_HPP_

#include <chrono>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tourhmm/types.hpp"

namespace tourhmm::ingest {

using Date = std::chrono::sys_days;

// One timestamped, area-labelled event on a user timeline.
struct Review {
  std::string user_id;
  Item area_id = 0;
  Date date;
  std::optional<int> rating;
};

struct Visit {
  Date date;
  Item area_id = 0;

  friend bool operator==(const Visit&, const Visit&) = default;
};

// A run of visits by one user whose consecutive review dates are close
// enough to count as a single trip.
struct Stay {
  std::string user_id;
  std::vector<Visit> visits;

  Date first_date() const { return visits.front().date; }
  Date last_date() const { return visits.back().date; }
  Item first_area() const { return visits.front().area_id; }
  Item last_area() const { return visits.back().area_id; }
  // Inclusive of both endpoints; a single-day stay lasts 1 day.
  int duration_days() const;

  friend bool operator==(const Stay&, const Stay&) = default;
};

struct IngestConfig {
  int break_threshold_days = 7;
  std::size_t min_sequence_length = 2;
  bool dedupe_same_day = true;
  // Empty means every user is kept.
  std::set<std::string> user_allow_list;

  void validate() const;
};

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParsedReviews {
  std::vector<Review> reviews;
  std::vector<LineError> errors;
  std::size_t lines_read = 0;
  std::size_t missing_area = 0;
  std::size_t filtered_users = 0;

  std::size_t skipped() const {
    return errors.size() + missing_area + filtered_users;
  }
};

// Parses "YYYY-MM-DD"; returns nullopt for anything that is not a valid
// calendar day.
std::optional<Date> parse_iso_date(const std::string& text);

// Reads one JSON object per line with fields user, area, date and an
// optional rating. Blank lines are ignored. Malformed records are skipped
// and reported in `errors`; records without an area are skipped and counted.
ParsedReviews parse_reviews_jsonl(std::istream& in, const IngestConfig& cfg = {});

using Timelines = std::map<std::string, std::vector<Review>>;

// Groups reviews per user and sorts each timeline by date, keeping input
// order among reviews of the same day.
Timelines build_timelines(const std::vector<Review>& reviews);

// Splits a date-sorted timeline wherever two consecutive reviews are more
// than `break_threshold_days` apart.
std::vector<Stay> segment_stays(const std::vector<Review>& timeline,
                                const IngestConfig& cfg);

// Days strictly between the end of `before` and the start of `after`.
int break_days(const Stay& before, const Stay& after);

// True when the break is no longer than either stay and the trip resumes at
// the area where the earlier stay ended.
bool should_merge(const Stay& before, const Stay& after);

struct MergeResult {
  std::vector<Stay> stays;
  std::size_t merges = 0;
};

// Merges adjacent stays left to right, re-testing the grown stay against its
// next neighbour, and repeats passes until nothing changes.
MergeResult merge_stays(std::vector<Stay> stays);

struct Extraction {
  std::vector<Sequence> sequences;
  std::size_t dropped = 0;
};

Extraction extract_sequences(const std::vector<Stay>& stays,
                             const IngestConfig& cfg);

struct IngestReport {
  std::size_t reviews_read = 0;
  std::size_t reviews_skipped = 0;
  std::size_t users = 0;
  std::size_t stays = 0;
  std::size_t merges = 0;
  std::size_t sequences_kept = 0;
  std::size_t sequences_dropped = 0;
  std::vector<LineError> errors;
};

struct IngestResult {
  std::vector<Sequence> sequences;
  IngestReport report;
};

// Full pipeline: timelines, stays, merges, sequences. Output ordered by user
// id, then stay start date.
IngestResult run_ingest(const ParsedReviews& parsed, const IngestConfig& cfg);

}  // namespace tourhmm::ingest

#endif  // TOURHMM_INGEST_HPP_
