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

#ifndef FORM57_QA_HPP_
#define FORM57_QA_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "form57/article.hpp"
#include "form57/gateway.hpp"
#include "form57/json_io.hpp"
#include "form57/prompts.hpp"
#include "form57/schema.hpp"

namespace form57 {

// Single: one prompt per field. All: every field in one prompt.
// Group: one prompt per group of the grouping assignment.
enum class BatchingMode { Single, All, Group };

std::string_view to_string(BatchingMode mode);
std::optional<BatchingMode> batching_mode_from_string(std::string_view s);

struct UnknownValue {
  bool operator==(const UnknownValue&) const = default;
};
struct TextValue {
  std::string text;
  bool operator==(const TextValue&) const = default;
};
// Clock readings ("14:30") are stored as decimal hours (14.5).
struct DigitValue {
  double value = 0.0;
  bool operator==(const DigitValue&) const = default;
};
struct ChoiceValue {
  std::string code;
  bool operator==(const ChoiceValue&) const = default;
};

using AnswerValue = std::variant<UnknownValue, TextValue, DigitValue, ChoiceValue>;

struct FieldAnswer {
  PlaceKey key;
  AnswerValue value;
  std::string raw_model_text;

  bool is_unknown() const noexcept { return std::holds_alternative<UnknownValue>(value); }
  bool operator==(const FieldAnswer&) const = default;
};

// Answers for every answer place of a schema, in schema order.
struct PopulatedForm {
  std::string article_id;
  BatchingMode batching_mode = BatchingMode::Group;
  std::optional<GroupingAssignment> grouping_used;
  std::vector<FieldAnswer> answers;

  const FieldAnswer* find(const PlaceKey& key) const;
  // Replaces the answers whose keys appear in `updates`.
  void replace(const std::vector<FieldAnswer>& updates);
  bool operator==(const PopulatedForm&) const = default;
};

Json form_to_json(const PopulatedForm& form);
// Throws SchemaFormatError when the document does not cover exactly the
// schema's answer places or holds values that break their answer place.
PopulatedForm form_from_json(const Json& doc, const FormSchema& schema);

struct QaOptions {
  RetryPolicy retry;
  std::size_t max_parallel = 4;
  int max_output_tokens = 4096;
  const PromptSet* prompts = &PromptSet::builtin();
};

ModelRequest build_qa_prompt(std::span<const FormField> slice, const ArticleDoc& article,
                             const PromptSet& prompts = PromptSet::builtin());

// Never fails: malformed output, missing keys and values that do not fit the
// answer place all become Unknown, keeping the raw text for review.
std::vector<FieldAnswer> parse_answers(std::string_view model_text, std::span<const FormField> slice);

// Gateway calls: #fields (Single), 1 (All), #groups (Group). Any gateway
// failure discards the whole form.
PopulatedForm populate_form(const FormSchema& schema, const GroupingAssignment* grouping,
                            const ArticleDoc& article, BatchingMode mode, ModelGateway& gateway,
                            const QaOptions& options = {});

// Re-runs QA for one group; returns answers for exactly that group's places.
std::vector<FieldAnswer> populate_group(const FormSchema& schema, const GroupingAssignment& grouping,
                                        std::string_view group_name, const ArticleDoc& article,
                                        ModelGateway& gateway, const QaOptions& options = {});

}  // namespace form57

#endif  // FORM57_QA_HPP_
