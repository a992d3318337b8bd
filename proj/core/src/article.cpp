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

#include "form57/article.hpp"

#include <algorithm>
#include <cstdio>

#include "form57/text.hpp"

namespace form57 {
namespace {

std::optional<std::string> opt_string(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) throw ArticleFormatError(std::string(key) + " must be a string");
  std::string value = text::trim(obj[key].get<std::string>());
  if (value.empty()) return std::nullopt;
  return value;
}

std::optional<int> opt_count(const Json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return std::nullopt;
  const Json& v = obj[key];
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<int>(v.get<long long>());
  if (v.is_string()) {
    if (auto n = text::first_number(v.get<std::string>()); n && *n >= 0) return static_cast<int>(*n);
  }
  throw ArticleFormatError(std::string(key) + " must be a non-negative integer");
}

}  // namespace

void LinkageCues::overlay(const LinkageCues& other) {
  if (other.user_sex) user_sex = other.user_sex;
  if (other.user_age) user_age = other.user_age;
  if (other.killed) killed = other.killed;
  if (other.injured) injured = other.injured;
  if (other.highway_name) highway_name = other.highway_name;
}

std::optional<char> parse_sex(std::string_view s) {
  const std::string v = text::casefold(text::trim(s));
  if (v == "m" || v == "male" || v == "man") return 'M';
  if (v == "f" || v == "female" || v == "woman") return 'F';
  return std::nullopt;
}

ArticleDoc article_from_json(std::string article_id, std::string body, const Json& meta) {
  if (text::trim(body).empty()) throw ArticleFormatError(article_id + ": article body is empty");
  if (!meta.is_object()) throw ArticleFormatError(article_id + ": metadata must be a JSON object");
  ArticleDoc doc;
  doc.article_id = std::move(article_id);
  doc.body = std::move(body);
  try {
    const auto published = opt_string(meta, "published_at");
    if (!published) throw ArticleFormatError("missing published_at");
    const auto date = parse_date(*published);
    if (!date) throw ArticleFormatError("unparseable published_at \"" + *published + "\"");
    doc.published_date = *date;
    doc.published_minutes = parse_iso_time_component(*published);
    doc.source_name = opt_string(meta, "source_name").value_or("");
    if (meta.contains("location")) {
      const Json& loc = meta["location"];
      doc.location = Location{opt_string(loc, "state"), opt_string(loc, "county"), opt_string(loc, "city")};
    }
    if (meta.contains("cues")) {
      const Json& cues = meta["cues"];
      if (auto sex = opt_string(cues, "user_sex")) doc.cues.user_sex = parse_sex(*sex);
      doc.cues.user_age = opt_count(cues, "user_age");
      doc.cues.killed = opt_count(cues, "killed");
      doc.cues.injured = opt_count(cues, "injured");
      doc.cues.highway_name = opt_string(cues, "highway_name");
    }
  } catch (const ArticleFormatError& e) {
    throw ArticleFormatError(doc.article_id + ": " + e.what());
  }
  return doc;
}

ArticleDoc load_article(const std::filesystem::path& dir, const std::string& article_id) {
  std::string body = read_text_file(dir / (article_id + ".txt"));
  const Json meta = read_json_file(dir / (article_id + ".meta.json"));
  return article_from_json(article_id, std::move(body), meta);
}

Json article_meta_to_json(const ArticleDoc& a) {
  std::string published = format_date(a.published_date);
  if (a.published_minutes) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "T%02d:%02d", *a.published_minutes / 60, *a.published_minutes % 60);
    published += buf;
  }
  Json loc = Json::object();
  if (a.location.state) loc["state"] = *a.location.state;
  if (a.location.county) loc["county"] = *a.location.county;
  if (a.location.city) loc["city"] = *a.location.city;
  Json cues = Json::object();
  if (a.cues.user_sex) cues["user_sex"] = std::string(1, *a.cues.user_sex);
  if (a.cues.user_age) cues["user_age"] = *a.cues.user_age;
  if (a.cues.killed) cues["killed"] = *a.cues.killed;
  if (a.cues.injured) cues["injured"] = *a.cues.injured;
  if (a.cues.highway_name) cues["highway_name"] = *a.cues.highway_name;
  return Json{{"published_at", published}, {"source_name", a.source_name}, {"location", loc}, {"cues", cues}};
}

std::vector<std::string> list_article_ids(const std::filesystem::path& dir) {
  std::vector<std::string> ids;
  if (!std::filesystem::is_directory(dir)) throw FileError(dir, "articles directory not found");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace form57
