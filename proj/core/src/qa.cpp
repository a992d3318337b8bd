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

#include "form57/qa.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "form57/parallel.hpp"
#include "form57/text.hpp"

namespace form57 {
namespace {

constexpr std::size_t kRawExcerpt = 2000;

bool is_unknown_token(std::string_view s) {
  const std::string t = text::trim(s);
  return t.empty() || text::casefold(t) == "unknown";
}

std::string raw_of(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

// "3 - Moving over crossing" style answers: a code followed by its own label.
const Choice* resolve_code_with_label(const ChoiceSet& choices, std::string_view answer) {
  const std::string trimmed = text::trim(answer);
  const auto sep = trimmed.find_first_of(" .-:)");
  if (sep == std::string::npos || sep == 0) return nullptr;
  const Choice* choice = choices.find_code(trimmed.substr(0, sep));
  if (choice == nullptr) {
    const std::string code = text::casefold(trimmed.substr(0, sep));
    for (const auto& c : choices.entries()) {
      if (text::casefold(c.code) == code) choice = &c;
    }
  }
  if (choice == nullptr) return nullptr;
  const std::string rest = text::normalize(trimmed.substr(sep));
  return rest.empty() || rest == text::normalize(choice->label) ? choice : nullptr;
}

AnswerValue interpret(const Json& v, const AnswerPlace& place) {
  if (v.is_null()) return UnknownValue{};
  if (v.is_string() && is_unknown_token(v.get<std::string>())) return UnknownValue{};
  if (v.is_object() || v.is_array()) return UnknownValue{};

  switch (place.answer_type) {
    case AnswerType::Text:
      return TextValue{v.is_string() ? text::trim(v.get<std::string>()) : v.dump()};
    case AnswerType::Digit: {
      std::optional<double> number;
      if (v.is_number()) {
        number = v.get<double>();
      } else if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (auto minutes = text::first_clock_minutes(s)) {
          number = *minutes / 60.0;
        } else {
          number = text::first_number(s);
        }
      }
      if (!number || !std::isfinite(*number)) return UnknownValue{};
      return DigitValue{*number};
    }
    case AnswerType::Choice: {
      const std::string answer = v.is_string() ? v.get<std::string>() : v.dump();
      const Choice* choice = place.choices.resolve(answer);
      if (choice == nullptr) choice = resolve_code_with_label(place.choices, answer);
      if (choice == nullptr) return UnknownValue{};
      return ChoiceValue{choice->code};
    }
  }
  return UnknownValue{};
}

// Looks the answer up by exact key, then by normalized key, then in a
// nested {"field": {"place": ...}} layout.
const Json* lookup(const Json& doc, const PlaceKey& key) {
  if (!doc.is_object()) return nullptr;
  const std::string exact = key.str();
  if (auto it = doc.find(exact); it != doc.end()) return &*it;
  const std::string wanted = text::normalize(exact);
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (text::normalize(it.key()) == wanted) return &*it;
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it->is_object() || text::normalize(it.key()) != text::normalize(key.field_id)) continue;
    for (auto inner = it->begin(); inner != it->end(); ++inner) {
      if (text::normalize(inner.key()) == text::normalize(key.place)) return &*inner;
    }
  }
  return nullptr;
}

std::string describe_fields(std::span<const FormField> slice) {
  std::string out;
  for (const auto& field : slice) {
    out += "Field " + field.name + "\n";
    for (const auto& place : field.answer_places) {
      out += "  - \"" + PlaceKey{field.field_id, place.name}.str() + "\" (" + std::string(to_string(place.answer_type)) + ")";
      if (place.answer_type == AnswerType::Choice) {
        out += " choices: ";
        bool first = true;
        for (const auto& c : place.choices.entries()) {
          out += (first ? "" : "; ") + c.code + " = " + c.label;
          first = false;
        }
      }
      out += "\n";
    }
  }
  return out;
}

std::string example_answer(std::span<const FormField> slice) {
  Json example = Json::object();
  std::size_t shown = 0;
  for (const auto& field : slice) {
    for (const auto& place : field.answer_places) {
      if (shown++ == 2) return example.dump();
      example[PlaceKey{field.field_id, place.name}.str()] = "<answer or Unknown>";
    }
  }
  return example.dump();
}

std::vector<FormField> fields_of(const FormSchema& schema, const Group& group) {
  std::vector<FormField> slice;
  for (const auto& id : group.field_ids) slice.push_back(*schema.find(id));
  return slice;
}

std::vector<FieldAnswer> ask(std::span<const FormField> slice, const ArticleDoc& article, std::string label,
                             ModelGateway& gateway, const QaOptions& options) {
  ModelRequest request = build_qa_prompt(slice, article, *options.prompts);
  request.label = std::move(label);
  request.max_output_tokens = options.max_output_tokens;
  const ModelResponse response = complete_with_retry(gateway, request, options.retry);
  return parse_answers(response.text, slice);
}

void check_grouping(const FormSchema& schema, const GroupingAssignment& grouping) {
  const ValidationResult result = validate_groups_format(serialize_grouping(grouping), schema);
  if (!result.ok()) throw std::invalid_argument("grouping does not partition the schema: " + result.summary(3));
}

}  // namespace

std::string_view to_string(BatchingMode mode) {
  switch (mode) {
    case BatchingMode::Single:
      return "single";
    case BatchingMode::All:
      return "all";
    case BatchingMode::Group:
      return "group";
  }
  return "group";
}

std::optional<BatchingMode> batching_mode_from_string(std::string_view s) {
  const std::string v = text::casefold(s);
  if (v == "single") return BatchingMode::Single;
  if (v == "all") return BatchingMode::All;
  if (v == "group") return BatchingMode::Group;
  return std::nullopt;
}

const FieldAnswer* PopulatedForm::find(const PlaceKey& key) const {
  for (const auto& a : answers) {
    if (a.key == key) return &a;
  }
  return nullptr;
}

void PopulatedForm::replace(const std::vector<FieldAnswer>& updates) {
  for (const auto& update : updates) {
    for (auto& a : answers) {
      if (a.key == update.key) a = update;
    }
  }
}

Json form_to_json(const PopulatedForm& form) {
  Json answers = Json::object();
  for (const auto& a : form.answers) {
    Json entry;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, UnknownValue>) {
            entry["kind"] = "unknown";
          } else if constexpr (std::is_same_v<T, TextValue>) {
            entry["kind"] = "text";
            entry["value"] = v.text;
          } else if constexpr (std::is_same_v<T, DigitValue>) {
            entry["kind"] = "digit";
            entry["value"] = v.value;
          } else {
            entry["kind"] = "choice";
            entry["value"] = v.code;
          }
        },
        a.value);
    entry["raw"] = a.raw_model_text;
    answers[a.key.str()] = std::move(entry);
  }
  return Json{{"article_id", form.article_id},
              {"batching_mode", std::string(to_string(form.batching_mode))},
              {"grouping_used", form.grouping_used ? serialize_grouping(*form.grouping_used) : Json(nullptr)},
              {"answers", std::move(answers)}};
}

PopulatedForm form_from_json(const Json& doc, const FormSchema& schema) {
  if (!doc.is_object()) throw SchemaFormatError("", "populated form must be an object");
  PopulatedForm form;
  try {
    form.article_id = doc.at("article_id").get<std::string>();
    auto mode = batching_mode_from_string(doc.at("batching_mode").get<std::string>());
    if (!mode) throw SchemaFormatError("/batching_mode", "unknown batching mode");
    form.batching_mode = *mode;
    if (doc.contains("grouping_used") && !doc["grouping_used"].is_null()) {
      form.grouping_used = parse_grouping(doc["grouping_used"], schema);
    }
    const Json& answers = doc.at("answers");
    if (!answers.is_object()) throw SchemaFormatError("/answers", "expected an object");
    for (const auto& key : schema.place_keys()) {
      const std::string k = key.str();
      if (!answers.contains(k)) throw SchemaFormatError("/answers", "missing answer for " + k);
      const Json& entry = answers[k];
      const std::string kind = entry.at("kind").get<std::string>();
      FieldAnswer answer{key, UnknownValue{}, entry.value("raw", std::string())};
      const AnswerPlace* place = schema.find(key);
      if (kind == "text" && place->answer_type == AnswerType::Text) {
        answer.value = TextValue{entry.at("value").get<std::string>()};
      } else if (kind == "digit" && place->answer_type == AnswerType::Digit) {
        answer.value = DigitValue{entry.at("value").get<double>()};
      } else if (kind == "choice" && place->answer_type == AnswerType::Choice) {
        const std::string code = entry.at("value").get<std::string>();
        if (place->choices.find_code(code) == nullptr) {
          throw SchemaFormatError("/answers/" + k, "choice code " + code + " not in choice set");
        }
        answer.value = ChoiceValue{code};
      } else if (kind != "unknown") {
        throw SchemaFormatError("/answers/" + k, "answer kind " + kind + " does not fit the answer place");
      }
      form.answers.push_back(std::move(answer));
    }
    if (answers.size() != form.answers.size()) throw SchemaFormatError("/answers", "answers for places not in the schema");
  } catch (const Json::exception& e) {
    throw SchemaFormatError("", std::string("malformed populated form: ") + e.what());
  }
  return form;
}

ModelRequest build_qa_prompt(std::span<const FormField> slice, const ArticleDoc& article, const PromptSet& prompts) {
  if (slice.empty()) throw std::invalid_argument("build_qa_prompt needs at least one field");
  ModelRequest request;
  request.role = ModelRole::Qa;
  request.system_prompt = prompts.get("qa.system");
  request.user_parts.emplace_back(TextPart{prompts.render(
      "qa.user", {{"source", article.source_name.empty() ? "unknown source" : article.source_name},
                  {"published", format_date(article.published_date)},
                  {"article", article.body},
                  {"fields", describe_fields(slice)},
                  {"example", example_answer(slice)}})});
  request.temperature = 0.0;
  request.response_format = ResponseFormat::JsonObject;
  return request;
}

std::vector<FieldAnswer> parse_answers(std::string_view model_text, std::span<const FormField> slice) {
  const std::optional<Json> doc = extract_json_payload(model_text);
  std::vector<FieldAnswer> out;
  for (const auto& field : slice) {
    for (const auto& place : field.answer_places) {
      PlaceKey key{field.field_id, place.name};
      if (!doc) {
        out.push_back({std::move(key), UnknownValue{}, text::excerpt(model_text, kRawExcerpt)});
        continue;
      }
      const Json* value = lookup(*doc, key);
      if (value == nullptr) {
        out.push_back({std::move(key), UnknownValue{}, ""});
        continue;
      }
      out.push_back({std::move(key), interpret(*value, place), raw_of(*value)});
    }
  }
  return out;
}

PopulatedForm populate_form(const FormSchema& schema, const GroupingAssignment* grouping, const ArticleDoc& article,
                            BatchingMode mode, ModelGateway& gateway, const QaOptions& options) {
  struct Batch {
    std::string label;
    std::vector<FormField> fields;
  };
  std::vector<Batch> batches;
  switch (mode) {
    case BatchingMode::Single:
      for (const auto& f : schema.fields()) batches.push_back({"qa.single#" + f.field_id, {f}});
      break;
    case BatchingMode::All:
      batches.push_back({"qa.all", schema.fields()});
      break;
    case BatchingMode::Group:
      if (grouping == nullptr) throw std::invalid_argument("group batching requires a grouping assignment");
      check_grouping(schema, *grouping);
      for (const auto& g : grouping->groups()) batches.push_back({"qa.group#" + g.name, fields_of(schema, g)});
      break;
  }

  std::vector<std::vector<FieldAnswer>> results(batches.size());
  parallel_for(batches.size(), options.max_parallel, [&](std::size_t i) {
    results[i] = ask(batches[i].fields, article, batches[i].label, gateway, options);
  });

  std::map<PlaceKey, FieldAnswer> by_key;
  for (auto& batch : results) {
    for (auto& a : batch) by_key.emplace(a.key, std::move(a));
  }
  PopulatedForm form;
  form.article_id = article.article_id;
  form.batching_mode = mode;
  if (mode == BatchingMode::Group) form.grouping_used = *grouping;
  for (const auto& key : schema.place_keys()) form.answers.push_back(std::move(by_key.at(key)));
  return form;
}

std::vector<FieldAnswer> populate_group(const FormSchema& schema, const GroupingAssignment& grouping,
                                        std::string_view group_name, const ArticleDoc& article, ModelGateway& gateway,
                                        const QaOptions& options) {
  check_grouping(schema, grouping);
  const Group* group = grouping.find(group_name);
  if (group == nullptr) throw std::out_of_range("unknown group \"" + std::string(group_name) + "\"");
  const std::vector<FormField> slice = fields_of(schema, *group);
  return ask(slice, article, "qa.group#" + group->name, gateway, options);
}

}  // namespace form57
