// Copyright 2026 The form57 Authors.
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

#ifndef FORM57_LINKAGE_HPP_
#define FORM57_LINKAGE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "form57/article.hpp"
#include "form57/civil_time.hpp"
#include "form57/csv.hpp"
#include "form57/json_io.hpp"

namespace form57 {

struct FraRecord {
  std::string record_id;
  Date incident_date;
  std::optional<int> incident_minutes;
  std::string state;
  std::string county;
  std::string city;
  std::optional<std::string> highway_name;
  std::optional<char> user_sex;
  std::optional<int> user_age;
  int killed = 0;
  int injured = 0;
  // Every cell of the row, keyed by lower-cased header name.
  std::map<std::string, std::string> raw_fields;
};

struct FraLoadResult {
  std::vector<FraRecord> records;
  std::vector<std::string> warnings;  // "line N: reason" for every rejected row
};

// Required header columns (case-insensitive): id, date, state, county, city,
// killed, injured. Optional: time, highway, sex, age. Throws CsvFormatError
// when a required column is missing.
FraLoadResult parse_fra_csv(std::string_view text);
FraLoadResult load_fra_csv(const std::filesystem::path& path);

enum class HardKey { Date, County, City, Highway };
std::string_view to_string(HardKey key);

enum class MatchDecision { Matched, Rejected };
std::string_view to_string(MatchDecision decision);

inline constexpr int kMaxDayOffset = 7;
inline constexpr int kAgeTolerance = 2;

struct MatchCandidate {
  std::string article_id;
  std::string record_id;
  int day_offset = 0;  // article date minus record date
  std::set<HardKey> hard_keys_passed;
  double soft_score = 0.0;
  MatchDecision decision = MatchDecision::Rejected;
};

// Same state and a day offset in [0, 7]; everything else is scored.
// `extracted` overrides the cues carried by the article metadata.
std::vector<MatchCandidate> match_article(const ArticleDoc& article, const LinkageCues& extracted,
                                          std::span<const FraRecord> records);

// Fraction of the cues present on both sides that agree; 0 when none are.
double soft_score(const LinkageCues& cues, const FraRecord& record);

struct LinkedPair {
  std::string article_id;
  std::string record_id;
  int day_offset = 0;
  double soft_score = 0.0;
  bool operator==(const LinkedPair&) const = default;
};

struct AmbiguousLink {
  std::string article_id;
  std::vector<std::string> record_ids;
  bool operator==(const AmbiguousLink&) const = default;
};

struct LinkageReport {
  std::vector<LinkedPair> pairs;
  std::vector<std::string> unmatched_articles;
  std::vector<AmbiguousLink> ambiguous;

  const LinkedPair* find_pair(std::string_view article_id) const;
  bool operator==(const LinkageReport&) const = default;
};

struct LinkageInput {
  ArticleDoc article;
  LinkageCues extracted;
};

// Articles are reported in article_id order, whatever the input order.
LinkageReport build_linkage_report(std::span<const LinkageInput> articles, std::span<const FraRecord> records);

Json linkage_to_json(const LinkageReport& report);
LinkageReport linkage_from_json(const Json& doc);

}  // namespace form57

#endif  // FORM57_LINKAGE_HPP_
