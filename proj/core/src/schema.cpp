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

#include "form57/schema.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <unordered_map>

#include "form57/text.hpp"

namespace form57 {
namespace {

constexpr std::size_t kMaxChoiceCodeLength = 16;

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string child(const std::string& path, std::string_view token) {
  return path + "/" + escape_pointer_token(token);
}

std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

class IssueSink {
 public:
  void add(std::string path, std::string reason) {
    result_.issues.push_back({std::move(path), std::move(reason)});
  }
  ValidationResult take() { return std::move(result_); }

 private:
  ValidationResult result_;
};

void check_keys(const Json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed, IssueSink& sink) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      sink.add(child(path, key), "unexpected key");
    }
  }
}

// Validates {"answer_type": ..., "choices": {...}} as found on a Naive field
// or a HumanCentric answer place.
void check_answer_spec(const Json& obj, const std::string& path, IssueSink& sink) {
  std::optional<AnswerType> type;
  if (!obj.contains("answer_type")) {
    sink.add(child(path, "answer_type"), "missing required key");
  } else if (!obj["answer_type"].is_string()) {
    sink.add(child(path, "answer_type"), "expected a string");
  } else {
    type = answer_type_from_string(obj["answer_type"].get<std::string>());
    if (!type) sink.add(child(path, "answer_type"), "must be one of text, digit, choice");
  }

  if (!obj.contains("choices")) {
    sink.add(child(path, "choices"), "missing required key");
    return;
  }
  const Json& choices = obj["choices"];
  const std::string choices_path = child(path, "choices");
  if (!choices.is_object()) {
    sink.add(choices_path, "expected an object mapping choice code to label");
    return;
  }
  for (const auto& [code, label] : choices.items()) {
    const std::string entry_path = child(choices_path, code);
    if (code.empty()) {
      sink.add(entry_path, "choice code must be non-empty");
    } else if (code.size() > kMaxChoiceCodeLength) {
      sink.add(entry_path, "choice code longer than 16 characters");
    } else if (text::trim(code) != code) {
      sink.add(entry_path, "choice code has surrounding whitespace");
    }
    if (!label.is_string()) {
      sink.add(entry_path, "choice label must be a string");
    } else if (text::trim(label.get<std::string>()).empty()) {
      sink.add(entry_path, "choice label must be non-empty");
    }
  }
  if (type == AnswerType::Choice && choices.empty()) {
    sink.add(choices_path, "choice answer requires a non-empty choice set");
  }
  if ((type == AnswerType::Text || type == AnswerType::Digit) && !choices.empty()) {
    sink.add(choices_path, "text and digit answers must have no choices");
  }
}

AnswerPlace build_place(std::string name, const Json& obj) {
  std::vector<Choice> choices;
  for (const auto& [code, label] : obj["choices"].items()) {
    choices.push_back({code, label.get<std::string>()});
  }
  return AnswerPlace{std::move(name), *answer_type_from_string(obj["answer_type"].get<std::string>()),
                     ChoiceSet(std::move(choices))};
}

Json serialize_answer_spec(const AnswerPlace& place) {
  Json choices = Json::object();
  for (const auto& c : place.choices.entries()) choices[c.code] = c.label;
  return Json{{"answer_type", std::string(to_string(place.answer_type))}, {"choices", std::move(choices)}};
}

}  // namespace

std::string_view to_string(AnswerType type) {
  switch (type) {
    case AnswerType::Text:
      return "text";
    case AnswerType::Digit:
      return "digit";
    case AnswerType::Choice:
      return "choice";
  }
  return "text";
}

std::optional<AnswerType> answer_type_from_string(std::string_view s) {
  if (s == "text") return AnswerType::Text;
  if (s == "digit") return AnswerType::Digit;
  if (s == "choice") return AnswerType::Choice;
  return std::nullopt;
}

std::string_view to_string(SchemaVariant variant) {
  return variant == SchemaVariant::Naive ? "naive" : "human-centric";
}

std::optional<SchemaVariant> schema_variant_from_string(std::string_view s) {
  if (s == "naive") return SchemaVariant::Naive;
  if (s == "human-centric" || s == "human_centric") return SchemaVariant::HumanCentric;
  return std::nullopt;
}

ChoiceSet::ChoiceSet(std::vector<Choice> entries) : entries_(std::move(entries)) {
  std::set<std::string_view> seen;
  for (const auto& c : entries_) {
    if (c.code.empty()) throw std::invalid_argument("choice code must be non-empty");
    if (c.label.empty()) throw std::invalid_argument("choice label must be non-empty (code " + c.code + ")");
    if (!seen.insert(c.code).second) throw std::invalid_argument("duplicate choice code " + c.code);
  }
}

const Choice* ChoiceSet::find_code(std::string_view code) const {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const Choice& c) { return c.code == code; });
  return it == entries_.end() ? nullptr : &*it;
}

const Choice* ChoiceSet::resolve(std::string_view answer) const {
  const std::string wanted = text::casefold(text::collapse_whitespace(answer));
  if (wanted.empty()) return nullptr;
  for (const auto& c : entries_) {
    if (text::casefold(c.code) == wanted) return &c;
  }
  for (const auto& c : entries_) {
    if (text::casefold(text::collapse_whitespace(c.label)) == wanted) return &c;
  }
  return nullptr;
}

const AnswerPlace* FormField::place(std::string_view place_name) const {
  auto it = std::find_if(answer_places.begin(), answer_places.end(),
                         [&](const AnswerPlace& p) { return p.name == place_name; });
  return it == answer_places.end() ? nullptr : &*it;
}

std::optional<PlaceKey> PlaceKey::parse(std::string_view key) {
  const auto slash = key.find('/');
  if (slash == std::string_view::npos || slash == 0 || slash + 1 == key.size()) return std::nullopt;
  return PlaceKey{std::string(key.substr(0, slash)), std::string(key.substr(slash + 1))};
}

std::string ValidationResult::summary(std::size_t max_issues) const {
  if (ok()) return "ok";
  std::string out;
  for (std::size_t i = 0; i < issues.size() && i < max_issues; ++i) {
    if (!out.empty()) out += "; ";
    out += (issues[i].path.empty() ? "<root>" : issues[i].path) + ": " + issues[i].reason;
  }
  if (issues.size() > max_issues) out += "; (+" + std::to_string(issues.size() - max_issues) + " more)";
  return out;
}

SchemaFormatError::SchemaFormatError(std::string path, std::string reason)
    : std::runtime_error("schema format error at " + (path.empty() ? std::string("<root>") : path) +
                         ": " + reason),
      path_(std::move(path)),
      reason_(std::move(reason)) {}

FormSchema FormSchema::from_fields(std::vector<FormField> fields) {
  std::set<std::string_view> ids;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& f = fields[i];
    const std::string path = child("", i);
    auto parsed_id = field_id_from_name(f.name);
    if (!parsed_id || *parsed_id != f.field_id) {
      throw SchemaFormatError(child(path, "name"), "name does not start with field id " + f.field_id);
    }
    if (!ids.insert(f.field_id).second) throw SchemaFormatError(path, "duplicate field id " + f.field_id);
    if (f.answer_places.empty()) throw SchemaFormatError(path, "field has no answer places");
    std::set<std::string_view> names;
    for (const auto& p : f.answer_places) {
      if (p.name.empty()) throw SchemaFormatError(path, "answer place name must be non-empty");
      if (!names.insert(p.name).second) throw SchemaFormatError(path, "duplicate answer place " + p.name);
      const bool needs_choices = p.answer_type == AnswerType::Choice;
      if (needs_choices == p.choices.empty()) {
        throw SchemaFormatError(child(path, p.name), "choices inconsistent with answer type");
      }
    }
  }
  FormSchema schema;
  schema.fields_ = std::move(fields);
  return schema;
}

const FormField* FormSchema::find(std::string_view field_id) const {
  auto it = std::find_if(fields_.begin(), fields_.end(),
                         [&](const FormField& f) { return f.field_id == field_id; });
  return it == fields_.end() ? nullptr : &*it;
}

const AnswerPlace* FormSchema::find(const PlaceKey& key) const {
  const FormField* field = find(key.field_id);
  return field == nullptr ? nullptr : field->place(key.place);
}

std::vector<PlaceKey> FormSchema::place_keys() const {
  std::vector<PlaceKey> keys;
  for (const auto& f : fields_) {
    for (const auto& p : f.answer_places) keys.push_back({f.field_id, p.name});
  }
  return keys;
}

std::optional<std::string> field_id_from_name(std::string_view name) {
  static const std::regex kPrefix(R"(^([0-9]+[A-Za-z]?)\.(\s|$))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(name.begin(), name.end(), m, kPrefix)) return std::nullopt;
  return m[1].str();
}

ValidationResult validate_transcription_format(const Json& doc, SchemaVariant variant) {
  IssueSink sink;
  if (!doc.is_array()) {
    sink.add("", "expected an array of fields");
    return sink.take();
  }
  std::set<std::string> ids;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& field = doc[i];
    const std::string path = child("", i);
    if (!field.is_object()) {
      sink.add(path, "expected a field object");
      continue;
    }
    if (variant == SchemaVariant::Naive) {
      check_keys(field, path, {"name", "answer_type", "choices"}, sink);
    } else {
      check_keys(field, path, {"name", "answer_places"}, sink);
    }

    if (!field.contains("name")) {
      sink.add(child(path, "name"), "missing required key");
    } else if (!field["name"].is_string()) {
      sink.add(child(path, "name"), "expected a string");
    } else {
      const auto& name = field["name"].get_ref<const std::string&>();
      auto id = field_id_from_name(name);
      if (text::trim(name).empty()) {
        sink.add(child(path, "name"), "must be non-empty");
      } else if (!id) {
        sink.add(child(path, "name"), "must start with the printed field number, e.g. \"6. \"");
      } else if (!ids.insert(*id).second) {
        sink.add(child(path, "name"), "duplicate field id " + *id);
      }
    }

    if (variant == SchemaVariant::Naive) {
      check_answer_spec(field, path, sink);
      continue;
    }

    const std::string places_path = child(path, "answer_places");
    if (!field.contains("answer_places")) {
      sink.add(places_path, "missing required key");
      continue;
    }
    const Json& places = field["answer_places"];
    if (!places.is_object()) {
      sink.add(places_path, "expected an object mapping answer place name to its spec");
      continue;
    }
    if (places.empty()) sink.add(places_path, "field must have at least one answer place");
    for (const auto& [place_name, place] : places.items()) {
      const std::string place_path = child(places_path, place_name);
      if (text::trim(place_name).empty()) sink.add(place_path, "answer place name must be non-empty");
      if (!place.is_object()) {
        sink.add(place_path, "expected an answer place object");
        continue;
      }
      check_keys(place, place_path, {"answer_type", "choices"}, sink);
      check_answer_spec(place, place_path, sink);
    }
  }
  return sink.take();
}

FormSchema parse_schema(const Json& doc, SchemaVariant variant) {
  ValidationResult result = validate_transcription_format(doc, variant);
  if (!result.ok()) throw SchemaFormatError(result.issues.front().path, result.issues.front().reason);

  std::vector<FormField> fields;
  fields.reserve(doc.size());
  for (const Json& f : doc) {
    FormField field;
    field.name = f["name"].get<std::string>();
    field.field_id = *field_id_from_name(field.name);
    if (variant == SchemaVariant::Naive) {
      field.answer_places.push_back(build_place(std::string(kImplicitPlaceName), f));
    } else {
      for (const auto& [place_name, place] : f["answer_places"].items()) {
        field.answer_places.push_back(build_place(place_name, place));
      }
    }
    fields.push_back(std::move(field));
  }
  return FormSchema::from_fields(std::move(fields));
}

Json serialize_schema(const FormSchema& schema, SchemaVariant variant) {
  Json doc = Json::array();
  for (const auto& field : schema.fields()) {
    Json f{{"name", field.name}};
    if (variant == SchemaVariant::Naive) {
      if (field.answer_places.size() != 1) {
        throw std::invalid_argument("field " + field.field_id +
                                    " has several answer places; naive layout holds one");
      }
      const Json spec = serialize_answer_spec(field.answer_places.front());
      for (auto it = spec.begin(); it != spec.end(); ++it) f[it.key()] = *it;
    } else {
      Json places = Json::object();
      for (const auto& p : field.answer_places) places[p.name] = serialize_answer_spec(p);
      f["answer_places"] = std::move(places);
    }
    doc.push_back(std::move(f));
  }
  return doc;
}

const Group* GroupingAssignment::find(std::string_view group_name) const {
  auto it = std::find_if(groups_.begin(), groups_.end(),
                         [&](const Group& g) { return g.name == group_name; });
  return it == groups_.end() ? nullptr : &*it;
}

const Group* GroupingAssignment::group_of(std::string_view field_id) const {
  for (const auto& g : groups_) {
    if (std::find(g.field_ids.begin(), g.field_ids.end(), field_id) != g.field_ids.end()) return &g;
  }
  return nullptr;
}

ValidationResult validate_groups_format(const Json& doc, const FormSchema& schema) {
  IssueSink sink;
  if (!doc.is_object()) {
    sink.add("", "expected an object mapping group name to a list of field ids");
    return sink.take();
  }
  std::unordered_map<std::string, std::string> owner;  // field id -> group
  std::set<std::string> folded_names;
  for (const auto& [group_name, members] : doc.items()) {
    const std::string path = child("", group_name);
    if (text::trim(group_name).empty()) sink.add(path, "group name must be non-empty");
    if (!folded_names.insert(text::casefold(text::collapse_whitespace(group_name))).second) {
      sink.add(path, "group name duplicates another group");
    }
    if (!members.is_array()) {
      sink.add(path, "expected an array of field ids");
      continue;
    }
    if (members.empty()) sink.add(path, "group has no fields");
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::string member_path = child(path, i);
      if (!members[i].is_string()) {
        sink.add(member_path, "field id must be a string");
        continue;
      }
      const std::string id = members[i].get<std::string>();
      if (schema.find(id) == nullptr) {
        sink.add(member_path, "unknown field id " + id);
        continue;
      }
      auto [it, inserted] = owner.emplace(id, group_name);
      if (!inserted) {
        sink.add(member_path, "field id " + id + " already assigned to group \"" + it->second + "\"");
      }
    }
  }
  for (const auto& field : schema.fields()) {
    if (!owner.contains(field.field_id)) sink.add("", "field id " + field.field_id + " is not assigned to any group");
  }
  return sink.take();
}

GroupingAssignment parse_grouping(const Json& doc, const FormSchema& schema) {
  ValidationResult result = validate_groups_format(doc, schema);
  if (!result.ok()) throw SchemaFormatError(result.issues.front().path, result.issues.front().reason);
  GroupingAssignment grouping;
  for (const auto& [group_name, members] : doc.items()) {
    Group g{group_name, {}};
    for (const auto& m : members) g.field_ids.push_back(m.get<std::string>());
    grouping.groups_.push_back(std::move(g));
  }
  return grouping;
}

Json serialize_grouping(const GroupingAssignment& grouping) {
  Json doc = Json::object();
  for (const auto& g : grouping.groups()) doc[g.name] = g.field_ids;
  return doc;
}

}  // namespace form57
