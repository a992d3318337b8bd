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

#ifndef FORM57_PROMPTS_HPP_
#define FORM57_PROMPTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "form57/json_io.hpp"

namespace form57 {

// Versioned prompt templates. Placeholders are written {{name}}.
class PromptSet {
 public:
  // The templates shipped in prompts/v1.json, compiled in.
  static const PromptSet& builtin();

  // {"version": "...", "templates": {name: string | [lines]}}. Throws
  // std::invalid_argument when a required template is missing.
  static PromptSet from_json(const Json& doc, std::string source);
  static PromptSet from_file(const std::filesystem::path& path);

  const std::string& version() const noexcept { return version_; }
  const std::string& source() const noexcept { return source_; }
  const std::string& get(std::string_view name) const;

  // Substitutes every {{placeholder}}; throws std::invalid_argument when a
  // placeholder has no value.
  std::string render(std::string_view name, const std::map<std::string, std::string>& vars) const;

 private:
  std::string version_;
  std::string source_;
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace form57

#endif  // FORM57_PROMPTS_HPP_
