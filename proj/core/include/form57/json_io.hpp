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

#ifndef FORM57_JSON_IO_HPP_
#define FORM57_JSON_IO_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace form57 {

// Insertion-ordered so that serialized artifacts are byte-stable.
using Json = nlohmann::ordered_json;

class JsonParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FileError : public std::runtime_error {
 public:
  FileError(const std::filesystem::path& path, const std::string& what)
      : std::runtime_error(path.string() + ": " + what), path_(path) {}
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

// Parses `text`, rejecting duplicate object keys anywhere in the document.
Json parse_json(std::string_view text);

// Pulls the JSON payload out of free-form model output: strips Markdown code
// fences and surrounding prose, then parses the outermost object or array.
std::optional<Json> extract_json_payload(std::string_view model_text);

std::string read_text_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

// Two-space indented dump terminated by a newline.
std::string dump_canonical(const Json& doc);

// Writes via a sibling temp file and rename(), creating parent directories.
void write_text_atomic(const std::filesystem::path& path, std::string_view content);
void write_json_atomic(const std::filesystem::path& path, const Json& doc);

}  // namespace form57

#endif  // FORM57_JSON_IO_HPP_
