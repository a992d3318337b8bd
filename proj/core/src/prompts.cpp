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

#include "form57/prompts.hpp"

#include <stdexcept>

#include "default_prompts.hpp"

namespace form57 {
namespace {

constexpr std::string_view kRequired[] = {
    "shape.human_centric", "shape.naive",        "transcribe.system", "transcribe.user",
    "merge_transcriptions.system", "merge_transcriptions.user", "group.system", "group.user",
    "merge_groups.system", "merge_groups.user", "qa.system",         "qa.user",
    "judge.system",        "judge.user",
};

}  // namespace

const PromptSet& PromptSet::builtin() {
  static const PromptSet set = from_json(parse_json(detail::kDefaultPromptsJson), detail::kDefaultPromptsSource);
  return set;
}

PromptSet PromptSet::from_json(const Json& doc, std::string source) {
  if (!doc.is_object() || !doc.contains("templates") || !doc["templates"].is_object()) {
    throw std::invalid_argument(source + ": expected {\"version\", \"templates\"}");
  }
  PromptSet set;
  set.version_ = doc.value("version", std::string("unversioned"));
  set.source_ = std::move(source);
  for (const auto& [name, body] : doc["templates"].items()) {
    std::string text;
    if (body.is_string()) {
      text = body.get<std::string>();
    } else if (body.is_array()) {
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (i > 0) text.push_back('\n');
        text += body[i].get<std::string>();
      }
    } else {
      throw std::invalid_argument(set.source_ + ": template " + name + " must be a string or array of lines");
    }
    set.templates_.emplace(name, std::move(text));
  }
  for (auto name : kRequired) {
    if (!set.templates_.contains(name)) {
      throw std::invalid_argument(set.source_ + ": missing template " + std::string(name));
    }
  }
  return set;
}

PromptSet PromptSet::from_file(const std::filesystem::path& path) {
  return from_json(read_json_file(path), path.string());
}

const std::string& PromptSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw std::invalid_argument("unknown prompt template " + std::string(name));
  return it->second;
}

std::string PromptSet::render(std::string_view name, const std::map<std::string, std::string>& vars) const {
  const std::string& tmpl = get(name);
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (true) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string::npos) {
      out.append(tmpl, pos);
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(tmpl, pos);
      break;
    }
    out.append(tmpl, pos, open - pos);
    const std::string key = tmpl.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it == vars.end()) {
      throw std::invalid_argument("template " + std::string(name) + " needs a value for {{" + key + "}}");
    }
    out += it->second;
    pos = close + 2;
  }
  return out;
}

}  // namespace form57
