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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>

#include "json.hpp"

namespace tourhmm::ingest {

namespace {

using nlohmann::json;

std::optional<Item> area_from_json(const json& value) {
  if (value.is_number_integer()) {
    const auto v = value.get<std::int64_t>();
    if (v < 0 || v > std::numeric_limits<Item>::max()) return std::nullopt;
    return static_cast<Item>(v);
  }
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    Item v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
      return std::nullopt;
    }
    return v;
  }
  return std::nullopt;
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

int Stay::duration_days() const {
  return (last_date() - first_date()).count() + 1;
}

void IngestConfig::validate() const {
  if (break_threshold_days < 1) {
    throw std::invalid_argument("break_threshold_days must be >= 1");
  }
}

std::optional<Date> parse_iso_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const char* s = text.data();
  if (std::from_chars(s, s + 4, y).ptr != s + 4) return std::nullopt;
  if (std::from_chars(s + 5, s + 7, m).ptr != s + 7) return std::nullopt;
  if (std::from_chars(s + 8, s + 10, d).ptr != s + 10) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

ParsedReviews parse_reviews_jsonl(std::istream& in, const IngestConfig& cfg) {
  ParsedReviews out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    ++out.lines_read;

    json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded() || !record.is_object()) {
      out.errors.push_back({lineno, "not a JSON object"});
      continue;
    }
    auto user = record.find("user");
    if (user == record.end() || !(user->is_string() || user->is_number_integer())) {
      out.errors.push_back({lineno, "missing or invalid 'user'"});
      continue;
    }
    auto date_field = record.find("date");
    if (date_field == record.end() || !date_field->is_string()) {
      out.errors.push_back({lineno, "missing or invalid 'date'"});
      continue;
    }
    auto date = parse_iso_date(date_field->get<std::string>());
    if (!date) {
      out.errors.push_back({lineno, "malformed date '" +
                                        date_field->get<std::string>() + "'"});
      continue;
    }
    auto area_field = record.find("area");
    if (area_field == record.end() || area_field->is_null()) {
      ++out.missing_area;
      continue;
    }
    auto area = area_from_json(*area_field);
    if (!area) {
      out.errors.push_back({lineno, "area must be a non-negative integer"});
      continue;
    }

    Review review;
    review.user_id = user->is_string() ? user->get<std::string>()
                                       : std::to_string(user->get<std::int64_t>());
    review.area_id = *area;
    review.date = *date;
    if (auto rating = record.find("rating");
        rating != record.end() && rating->is_number_integer()) {
      const int r = rating->get<int>();
      if (r < 1 || r > 5) {
        out.errors.push_back({lineno, "rating outside 1..5"});
        continue;
      }
      review.rating = r;
    }
    if (!cfg.user_allow_list.empty() &&
        !cfg.user_allow_list.contains(review.user_id)) {
      ++out.filtered_users;
      continue;
    }
    out.reviews.push_back(std::move(review));
  }
  return out;
}

Timelines build_timelines(const std::vector<Review>& reviews) {
  Timelines timelines;
  for (const auto& review : reviews) timelines[review.user_id].push_back(review);
  for (auto& [user, timeline] : timelines) {
    std::stable_sort(timeline.begin(), timeline.end(),
                     [](const Review& a, const Review& b) { return a.date < b.date; });
  }
  return timelines;
}

std::vector<Stay> segment_stays(const std::vector<Review>& timeline,
                                const IngestConfig& cfg) {
  cfg.validate();
  std::vector<Stay> stays;
  for (const auto& review : timeline) {
    if (stays.empty() ||
        (review.date - stays.back().last_date()).count() > cfg.break_threshold_days) {
      stays.push_back(Stay{review.user_id, {}});
    }
    auto& visits = stays.back().visits;
    const Visit visit{review.date, review.area_id};
    if (cfg.dedupe_same_day &&
        std::find(visits.begin(), visits.end(), visit) != visits.end()) {
      continue;
    }
    visits.push_back(visit);
  }
  return stays;
}

int break_days(const Stay& before, const Stay& after) {
  return (after.first_date() - before.last_date()).count() - 1;
}

bool should_merge(const Stay& before, const Stay& after) {
  const int gap = break_days(before, after);
  return gap <= before.duration_days() && gap <= after.duration_days() &&
         before.last_area() == after.first_area();
}

MergeResult merge_stays(std::vector<Stay> stays) {
  MergeResult result;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Stay> merged;
    merged.reserve(stays.size());
    for (auto& stay : stays) {
      if (!merged.empty() && should_merge(merged.back(), stay)) {
        auto& visits = merged.back().visits;
        visits.insert(visits.end(), stay.visits.begin(), stay.visits.end());
        ++result.merges;
        changed = true;
      } else {
        merged.push_back(std::move(stay));
      }
    }
    stays = std::move(merged);
  }
  result.stays = std::move(stays);
  return result;
}

Extraction extract_sequences(const std::vector<Stay>& stays,
                             const IngestConfig& cfg) {
  Extraction out;
  for (const auto& stay : stays) {
    Sequence seq;
    seq.reserve(stay.visits.size());
    for (const auto& visit : stay.visits) seq.push_back(visit.area_id);
    if (seq.size() < cfg.min_sequence_length || seq.empty()) {
      ++out.dropped;
    } else {
      out.sequences.push_back(std::move(seq));
    }
  }
  return out;
}

IngestResult run_ingest(const ParsedReviews& parsed, const IngestConfig& cfg) {
  cfg.validate();
  IngestResult result;
  auto& report = result.report;
  report.reviews_read = parsed.lines_read;
  report.reviews_skipped = parsed.skipped();
  report.errors = parsed.errors;

  const auto timelines = build_timelines(parsed.reviews);
  report.users = timelines.size();
  for (const auto& [user, timeline] : timelines) {
    auto merged = merge_stays(segment_stays(timeline, cfg));
    report.merges += merged.merges;
    report.stays += merged.stays.size();
    auto extracted = extract_sequences(merged.stays, cfg);
    report.sequences_dropped += extracted.dropped;
    for (auto& seq : extracted.sequences) result.sequences.push_back(std::move(seq));
  }
  report.sequences_kept = result.sequences.size();
  return result;
}

}  // namespace tourhmm::ingest
