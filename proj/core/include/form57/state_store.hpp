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

#ifndef FORM57_STATE_STORE_HPP_
#define FORM57_STATE_STORE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "form57/article.hpp"
#include "form57/evaluation.hpp"
#include "form57/linkage.hpp"
#include "form57/qa.hpp"
#include "form57/schema.hpp"

namespace form57 {

// Human-centric when any field carries "answer_places", naive otherwise.
SchemaVariant detect_schema_variant(const Json& doc);
FormSchema load_schema_file(const std::filesystem::path& path);

// Directory layout:
//   schema.json, grouping.json
//   articles/{id}.txt + {id}.meta.json
//   forms/{id}.form.json
//   annotations/{id}.answerable.json
//   linkage.json, fra.csv, crosswalk.json   (optional)
// Writes go through a temp file and a rename.
class StateStore {
 public:
  explicit StateStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  const FormSchema& schema() const noexcept { return schema_; }
  const GroupingAssignment& grouping() const noexcept { return grouping_; }

  std::vector<std::string> article_ids() const;
  bool has_article(const std::string& id) const;
  ArticleDoc article(const std::string& id) const;

  std::optional<PopulatedForm> form(const std::string& id) const;
  void save_form(const PopulatedForm& form) const;

  std::optional<AnswerabilityAnnotation> annotation(const std::string& id) const;
  void save_annotation(const AnswerabilityAnnotation& annotation) const;

  std::optional<LinkageReport> linkage() const;
  const std::map<std::string, FraRecord>& records() const noexcept { return records_; }
  const std::optional<Crosswalk>& crosswalk() const noexcept { return crosswalk_; }

  std::filesystem::path form_path(const std::string& id) const;
  std::filesystem::path annotation_path(const std::string& id) const;

 private:
  std::filesystem::path root_;
  FormSchema schema_;
  GroupingAssignment grouping_;
  std::map<std::string, FraRecord> records_;
  std::optional<Crosswalk> crosswalk_;
};

}  // namespace form57

#endif  // FORM57_STATE_STORE_HPP_
