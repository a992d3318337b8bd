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

#ifndef FORM57_ARTICLE_HPP_
#define FORM57_ARTICLE_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "form57/civil_time.hpp"
#include "form57/json_io.hpp"

namespace form57 {

struct Location {
  std::optional<std::string> state;
  std::optional<std::string> county;
  std::optional<std::string> city;
};

// Incident details reported in an article, used as soft evidence when linking
// it to an official record.
struct LinkageCues {
  std::optional<char> user_sex;  // 'M' or 'F'
  std::optional<int> user_age;
  std::optional<int> killed;
  std::optional<int> injured;
  std::optional<std::string> highway_name;

  // Fields set in `other` override this one's.
  void overlay(const LinkageCues& other);
};

std::optional<char> parse_sex(std::string_view s);

struct ArticleDoc {
  std::string article_id;
  std::string body;
  Date published_date;
  std::optional<int> published_minutes;  // minutes after midnight, if known
  std::string source_name;
  Location location;
  LinkageCues cues;
};

class ArticleFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reads {dir}/{article_id}.txt and {dir}/{article_id}.meta.json:
//   {"published_at": "2023-05-01[THH:MM]", "source_name": "...",
//    "location": {"state", "county", "city"},
//    "cues": {"user_sex", "user_age", "killed", "injured", "highway_name"}}
// Throws ArticleFormatError or FileError.
ArticleDoc load_article(const std::filesystem::path& dir, const std::string& article_id);

ArticleDoc article_from_json(std::string article_id, std::string body, const Json& meta);
Json article_meta_to_json(const ArticleDoc& article);

// Article ids present in `dir` (files named <id>.txt), sorted.
std::vector<std::string> list_article_ids(const std::filesystem::path& dir);

}  // namespace form57

#endif  // FORM57_ARTICLE_HPP_
