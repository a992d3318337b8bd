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

#include "form57/json_io.hpp"

#include <atomic>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <unistd.h>

namespace form57 {

Json parse_json(std::string_view text) {
  std::vector<std::set<std::string>> open_objects;
  std::string duplicate;
  auto callback = [&](int /*depth*/, Json::parse_event_t event, Json& parsed) {
    switch (event) {
      case Json::parse_event_t::object_start:
        open_objects.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        if (!open_objects.empty()) open_objects.pop_back();
        break;
      case Json::parse_event_t::key: {
        const auto& key = parsed.get_ref<const std::string&>();
        if (!open_objects.empty() && !open_objects.back().insert(key).second &&
            duplicate.empty()) {
          duplicate = key;
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), callback);
  } catch (const Json::parse_error& e) {
    throw JsonParseError(e.what());
  }
  if (!duplicate.empty()) throw JsonParseError("duplicate object key \"" + duplicate + "\"");
  return doc;
}

std::optional<Json> extract_json_payload(std::string_view model_text) {
  std::string_view body = model_text;
  if (auto fence = body.find("```"); fence != std::string_view::npos) {
    auto line_end = body.find('\n', fence);
    auto close = line_end == std::string_view::npos ? std::string_view::npos
                                                    : body.find("```", line_end);
    if (close != std::string_view::npos) body = body.substr(line_end + 1, close - line_end - 1);
  }
  const auto first = body.find_first_of("{[");
  if (first == std::string_view::npos) return std::nullopt;
  const char closer = body[first] == '{' ? '}' : ']';
  const auto last = body.find_last_of(closer);
  if (last == std::string_view::npos || last < first) return std::nullopt;
  try {
    return parse_json(body.substr(first, last - first + 1));
  } catch (const JsonParseError&) {
    return std::nullopt;
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw FileError(path, "read failed");
  return buf.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_json(text);
  } catch (const JsonParseError& e) {
    throw FileError(path, e.what());
  }
}

std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

void write_text_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(tmp, "cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw FileError(tmp, "write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw FileError(path, "rename failed: " + ec.message());
  }
}

void write_json_atomic(const std::filesystem::path& path, const Json& doc) {
  write_text_atomic(path, dump_canonical(doc));
}

}  // namespace form57
