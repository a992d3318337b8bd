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

#include "form57/state_store.hpp"

#include <algorithm>

namespace form57 {

SchemaVariant detect_schema_variant(const Json& doc) {
  if (doc.is_array()) {
    for (const auto& field : doc) {
      if (field.is_object() && field.contains("answer_places")) return SchemaVariant::HumanCentric;
    }
  }
  return SchemaVariant::Naive;
}

FormSchema load_schema_file(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return parse_schema(doc, detect_schema_variant(doc));
  } catch (const SchemaFormatError& e) {
    throw FileError(path, e.what());
  }
}

StateStore::StateStore(std::filesystem::path root) : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) throw FileError(root_, "state directory not found");
  schema_ = load_schema_file(root_ / "schema.json");
  try {
    grouping_ = parse_grouping(read_json_file(root_ / "grouping.json"), schema_);
  } catch (const SchemaFormatError& e) {
    throw FileError(root_ / "grouping.json", e.what());
  }
  if (std::filesystem::exists(root_ / "fra.csv")) {
    for (auto& rec : load_fra_csv(root_ / "fra.csv").records) records_.emplace(rec.record_id, std::move(rec));
  }
  if (std::filesystem::exists(root_ / "crosswalk.json")) {
    crosswalk_ = Crosswalk::from_file(root_ / "crosswalk.json");
    crosswalk_->check_against(schema_);
  }
}

std::vector<std::string> StateStore::article_ids() const { return list_article_ids(root_ / "articles"); }

bool StateStore::has_article(const std::string& id) const {
  const auto ids = article_ids();
  return std::binary_search(ids.begin(), ids.end(), id);
}

ArticleDoc StateStore::article(const std::string& id) const { return load_article(root_ / "articles", id); }

std::filesystem::path StateStore::form_path(const std::string& id) const {
  return root_ / "forms" / (id + ".form.json");
}

std::filesystem::path StateStore::annotation_path(const std::string& id) const {
  return root_ / "annotations" / (id + ".answerable.json");
}

std::optional<PopulatedForm> StateStore::form(const std::string& id) const {
  const auto path = form_path(id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return form_from_json(read_json_file(path), schema_);
  } catch (const SchemaFormatError& e) {
    throw FileError(path, e.what());
  }
}

void StateStore::save_form(const PopulatedForm& form) const {
  write_json_atomic(form_path(form.article_id), form_to_json(form));
}

std::optional<AnswerabilityAnnotation> StateStore::annotation(const std::string& id) const {
  const auto path = annotation_path(id);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return load_annotation(path, id, schema_);
}

void StateStore::save_annotation(const AnswerabilityAnnotation& annotation) const {
  write_json_atomic(annotation_path(annotation.article_id), annotation_to_json(annotation));
}

std::optional<LinkageReport> StateStore::linkage() const {
  const auto path = root_ / "linkage.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  return linkage_from_json(read_json_file(path));
}

}  // namespace form57
