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

#include "form57/linkage.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "form57/text.hpp"

namespace form57 {
namespace {

std::optional<int> parse_count(std::string_view cell) {
  const std::string s = text::trim(cell);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || value < 0) return std::nullopt;
  return value;
}

std::string place_norm(std::string_view s) {
  std::string n = text::normalize(s);
  for (std::string_view suffix : {" county", " parish", " borough"}) {
    if (n.size() > suffix.size() && n.ends_with(suffix)) n = n.substr(0, n.size() - suffix.size());
  }
  return n;
}

bool same_place(const std::optional<std::string>& a, std::string_view b) {
  return a && !place_norm(*a).empty() && place_norm(*a) == place_norm(b);
}

bool same_score(double a, double b) { return std::abs(a - b) < 1e-12; }

}  // namespace

std::string_view to_string(HardKey key) {
  switch (key) {
    case HardKey::Date:
      return "Date";
    case HardKey::County:
      return "County";
    case HardKey::City:
      return "City";
    case HardKey::Highway:
      return "Highway";
  }
  return "Date";
}

std::string_view to_string(MatchDecision decision) {
  return decision == MatchDecision::Matched ? "Matched" : "Rejected";
}

FraLoadResult parse_fra_csv(std::string_view csv_text) {
  const std::vector<CsvRow> rows = parse_csv(csv_text);
  if (rows.empty()) throw CsvFormatError("FRA CSV has no header row");

  std::vector<std::string> header;
  std::map<std::string, std::size_t> column;
  for (const auto& cell : rows.front().cells) {
    header.push_back(text::casefold(text::trim(cell)));
    column.emplace(header.back(), header.size() - 1);
  }
  std::vector<std::string> missing;
  for (const char* required : {"id", "date", "state", "county", "city", "killed", "injured"}) {
    if (!column.contains(required)) missing.emplace_back(required);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw CsvFormatError("FRA CSV header lacks required column(s): " + list);
  }

  FraLoadResult result;
  std::set<std::string> seen_ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    auto reject = [&](const std::string& why) {
      result.warnings.push_back("line " + std::to_string(row.line) + ": " + why);
    };
    if (row.cells.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " cells, found " + std::to_string(row.cells.size()));
      continue;
    }
    auto cell = [&](const char* name) -> std::string {
      auto it = column.find(name);
      return it == column.end() ? std::string() : text::trim(row.cells[it->second]);
    };

    FraRecord rec;
    rec.record_id = cell("id");
    if (rec.record_id.empty()) {
      reject("empty id");
      continue;
    }
    if (seen_ids.contains(rec.record_id)) {
      reject("duplicate id " + rec.record_id);
      continue;
    }
    const auto date = parse_date(cell("date"));
    if (!date) {
      reject("unparseable date \"" + cell("date") + "\"");
      continue;
    }
    rec.incident_date = *date;
    rec.state = cell("state");
    if (rec.state.empty()) {
      reject("empty state");
      continue;
    }
    const auto killed = parse_count(cell("killed"));
    const auto injured = parse_count(cell("injured"));
    if (!killed || !injured) {
      reject("killed and injured must be non-negative integers");
      continue;
    }
    rec.killed = *killed;
    rec.injured = *injured;
    rec.county = cell("county");
    rec.city = cell("city");
    rec.incident_minutes = parse_time_of_day(cell("time"));
    if (auto h = cell("highway"); !h.empty()) rec.highway_name = h;
    rec.user_sex = parse_sex(cell("sex"));
    rec.user_age = parse_count(cell("age"));
    for (std::size_t c = 0; c < header.size(); ++c) rec.raw_fields[header[c]] = row.cells[c];

    seen_ids.insert(rec.record_id);
    result.records.push_back(std::move(rec));
  }
  return result;
}

FraLoadResult load_fra_csv(const std::filesystem::path& path) { return parse_fra_csv(read_text_file(path)); }

double soft_score(const LinkageCues& cues, const FraRecord& record) {
  int available = 0;
  int agree = 0;
  auto tally = [&](bool present, bool agrees) {
    if (!present) return;
    ++available;
    if (agrees) ++agree;
  };
  tally(cues.user_sex && record.user_sex, cues.user_sex == record.user_sex);
  tally(cues.user_age && record.user_age,
        cues.user_age && record.user_age && std::abs(*cues.user_age - *record.user_age) <= kAgeTolerance);
  tally(cues.killed.has_value(), cues.killed == record.killed);
  tally(cues.injured.has_value(), cues.injured == record.injured);
  tally(cues.highway_name && record.highway_name,
        cues.highway_name && record.highway_name &&
            text::normalize(*cues.highway_name) == text::normalize(*record.highway_name));
  return available == 0 ? 0.0 : static_cast<double>(agree) / available;
}

std::vector<MatchCandidate> match_article(const ArticleDoc& article, const LinkageCues& extracted,
                                          std::span<const FraRecord> records) {
  LinkageCues cues = article.cues;
  cues.overlay(extracted);
  std::vector<MatchCandidate> out;
  if (!article.location.state) return out;
  const std::string state = text::normalize(*article.location.state);

  for (const auto& rec : records) {
    const int offset = days_between(rec.incident_date, article.published_date);
    if (offset < 0 || offset > kMaxDayOffset) continue;
    if (text::normalize(rec.state) != state) continue;

    MatchCandidate cand;
    cand.article_id = article.article_id;
    cand.record_id = rec.record_id;
    cand.day_offset = offset;
    cand.hard_keys_passed.insert(HardKey::Date);
    const bool county = same_place(article.location.county, rec.county);
    if (county) cand.hard_keys_passed.insert(HardKey::County);
    const bool city = article.location.city ? same_place(article.location.city, rec.city) : county;
    if (city) cand.hard_keys_passed.insert(HardKey::City);
    if (cues.highway_name && rec.highway_name &&
        text::normalize(*cues.highway_name) == text::normalize(*rec.highway_name)) {
      cand.hard_keys_passed.insert(HardKey::Highway);
    }
    cand.soft_score = soft_score(cues, rec);
    cand.decision = county || city ? MatchDecision::Matched : MatchDecision::Rejected;
    out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(), [](const MatchCandidate& a, const MatchCandidate& b) {
    if (!same_score(a.soft_score, b.soft_score)) return a.soft_score > b.soft_score;
    if (std::abs(a.day_offset) != std::abs(b.day_offset)) return std::abs(a.day_offset) < std::abs(b.day_offset);
    return a.record_id < b.record_id;
  });
  return out;
}

const LinkedPair* LinkageReport::find_pair(std::string_view article_id) const {
  for (const auto& p : pairs) {
    if (p.article_id == article_id) return &p;
  }
  return nullptr;
}

LinkageReport build_linkage_report(std::span<const LinkageInput> articles, std::span<const FraRecord> records) {
  std::vector<const LinkageInput*> order;
  for (const auto& a : articles) order.push_back(&a);
  std::sort(order.begin(), order.end(),
            [](const LinkageInput* a, const LinkageInput* b) { return a->article.article_id < b->article.article_id; });

  LinkageReport report;
  for (const LinkageInput* input : order) {
    std::vector<MatchCandidate> matched;
    for (auto& c : match_article(input->article, input->extracted, records)) {
      if (c.decision == MatchDecision::Matched) matched.push_back(std::move(c));
    }
    if (matched.empty()) {
      report.unmatched_articles.push_back(input->article.article_id);
      continue;
    }
    const MatchCandidate& best = matched.front();
    std::vector<std::string> tied;
    for (const auto& c : matched) {
      if (same_score(c.soft_score, best.soft_score) && std::abs(c.day_offset) == std::abs(best.day_offset)) {
        tied.push_back(c.record_id);
      }
    }
    if (tied.size() > 1) {
      report.ambiguous.push_back({input->article.article_id, std::move(tied)});
    } else {
      report.pairs.push_back({best.article_id, best.record_id, best.day_offset, best.soft_score});
    }
  }
  return report;
}

Json linkage_to_json(const LinkageReport& report) {
  Json pairs = Json::array();
  for (const auto& p : report.pairs) {
    pairs.push_back({{"article_id", p.article_id},
                     {"record_id", p.record_id},
                     {"day_offset", p.day_offset},
                     {"soft_score", p.soft_score}});
  }
  Json ambiguous = Json::array();
  for (const auto& a : report.ambiguous) ambiguous.push_back({{"article_id", a.article_id}, {"record_ids", a.record_ids}});
  return Json{{"pairs", std::move(pairs)},
              {"unmatched_articles", report.unmatched_articles},
              {"ambiguous", std::move(ambiguous)}};
}

LinkageReport linkage_from_json(const Json& doc) {
  LinkageReport report;
  try {
    for (const auto& p : doc.at("pairs")) {
      report.pairs.push_back({p.at("article_id").get<std::string>(), p.at("record_id").get<std::string>(),
                              p.at("day_offset").get<int>(), p.at("soft_score").get<double>()});
    }
    report.unmatched_articles = doc.at("unmatched_articles").get<std::vector<std::string>>();
    for (const auto& a : doc.at("ambiguous")) {
      report.ambiguous.push_back({a.at("article_id").get<std::string>(), a.at("record_ids").get<std::vector<std::string>>()});
    }
  } catch (const Json::exception& e) {
    throw JsonParseError(std::string("malformed linkage report: ") + e.what());
  }
  return report;
}

}  // namespace form57
