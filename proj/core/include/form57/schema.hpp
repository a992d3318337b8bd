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

#ifndef FORM57_SCHEMA_HPP_
#define FORM57_SCHEMA_HPP_

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "form57/json_io.hpp"

namespace form57 {

enum class AnswerType { Text, Digit, Choice };

std::string_view to_string(AnswerType type);
std::optional<AnswerType> answer_type_from_string(std::string_view s);

// Field-level layout (one answer per field) or subfield-level layout where
// every writable/markable area of a field is its own answer place.
enum class SchemaVariant { Naive, HumanCentric };

std::string_view to_string(SchemaVariant variant);
std::optional<SchemaVariant> schema_variant_from_string(std::string_view s);

struct Choice {
  std::string code;
  std::string label;
  bool operator==(const Choice&) const = default;
};

// Ordered code -> label map. Codes unique and non-empty; labels non-empty.
class ChoiceSet {
 public:
  ChoiceSet() = default;
  // Throws std::invalid_argument on an empty or duplicate code or empty label.
  explicit ChoiceSet(std::vector<Choice> entries);

  const std::vector<Choice>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  const Choice* find_code(std::string_view code) const;
  // Case-insensitive match on the code first, then on the exact label.
  const Choice* resolve(std::string_view answer) const;

  bool operator==(const ChoiceSet&) const = default;

 private:
  std::vector<Choice> entries_;
};

struct AnswerPlace {
  std::string name;
  AnswerType answer_type = AnswerType::Text;
  ChoiceSet choices;
  bool operator==(const AnswerPlace&) const = default;
};

struct FormField {
  std::string field_id;  // printed entry number, e.g. "6" or "20a"
  std::string name;      // printed label including the number, "6. Time of ..."
  std::vector<AnswerPlace> answer_places;

  const AnswerPlace* place(std::string_view place_name) const;
  bool operator==(const FormField&) const = default;
};

// Identifies one answer place; rendered "field_id/answer_place".
struct PlaceKey {
  std::string field_id;
  std::string place;

  std::string str() const { return field_id + "/" + place; }
  // Splits on the first '/', so place names may themselves contain '/'.
  static std::optional<PlaceKey> parse(std::string_view key);
  auto operator<=>(const PlaceKey&) const = default;
};

struct ValidationIssue {
  std::string path;  // JSON Pointer into the offending document
  std::string reason;
};

struct ValidationResult {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  std::string summary(std::size_t max_issues = 5) const;
};

class SchemaFormatError : public std::runtime_error {
 public:
  SchemaFormatError(std::string path, std::string reason);
  const std::string& path() const noexcept { return path_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

class FormSchema {
 public:
  FormSchema() = default;
  // Checks field/place invariants; throws SchemaFormatError.
  static FormSchema from_fields(std::vector<FormField> fields);

  const std::vector<FormField>& fields() const noexcept { return fields_; }
  std::size_t field_count() const noexcept { return fields_.size(); }
  const FormField* find(std::string_view field_id) const;
  const AnswerPlace* find(const PlaceKey& key) const;
  std::vector<PlaceKey> place_keys() const;

  bool operator==(const FormSchema&) const = default;

 private:
  std::vector<FormField> fields_;
};

// Field id parsed from a printed name such as "20a. Was the ...".
std::optional<std::string> field_id_from_name(std::string_view name);

// Place name used for the single implicit answer place of Naive fields.
inline constexpr std::string_view kImplicitPlaceName = "answer";

ValidationResult validate_transcription_format(const Json& doc, SchemaVariant variant);

FormSchema parse_schema(const Json& doc, SchemaVariant variant);

// Naive output requires every field to have exactly one answer place;
// std::invalid_argument otherwise.
Json serialize_schema(const FormSchema& schema, SchemaVariant variant);

struct Group {
  std::string name;
  std::vector<std::string> field_ids;
  bool operator==(const Group&) const = default;
};

// Partition of a schema's field ids into named groups.
class GroupingAssignment {
 public:
  GroupingAssignment() = default;

  const std::vector<Group>& groups() const noexcept { return groups_; }
  const Group* find(std::string_view group_name) const;
  const Group* group_of(std::string_view field_id) const;

  bool operator==(const GroupingAssignment&) const = default;

 private:
  friend GroupingAssignment parse_grouping(const Json& doc, const FormSchema& schema);
  std::vector<Group> groups_;
};

ValidationResult validate_groups_format(const Json& doc, const FormSchema& schema);

// Throws SchemaFormatError when validate_groups_format fails.
GroupingAssignment parse_grouping(const Json& doc, const FormSchema& schema);
Json serialize_grouping(const GroupingAssignment& grouping);

}  // namespace form57

#endif  // FORM57_SCHEMA_HPP_
