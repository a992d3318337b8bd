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

#ifndef FORM57_SCRIPTED_BACKEND_HPP_
#define FORM57_SCRIPTED_BACKEND_HPP_

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "form57/gateway.hpp"
#include "form57/json_io.hpp"

namespace form57 {

// All present criteria must hold. An empty matcher accepts any request.
struct TapeMatch {
  std::optional<ModelRole> role;
  std::optional<std::string> label;
  std::optional<std::string> label_prefix;
  std::optional<std::string> contains;  // substring of ModelRequest::joined_text()
  std::optional<std::string> image_digest;

  bool matches(const ModelRequest& request) const;
};

struct TapeFault {
  enum class Kind { Transport, RateLimited, Refused };
  Kind kind = Kind::Transport;
  std::chrono::milliseconds retry_after{0};
  int status = 500;
  std::string body;
};

struct TapeEntry {
  TapeMatch match;
  std::variant<std::string, TapeFault> outcome;
};

// The tape ran out or no remaining entry accepts the request. Deliberately
// not a GatewayError: it signals a broken test script, never a retry.
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Deterministic backend replaying canned responses and faults.
//
// Each request consumes the earliest unconsumed entry whose matcher accepts
// it. With matcher-free tapes this is plain FIFO order; label matchers let
// concurrent callers be pinned to specific entries.
class ScriptedBackend : public ModelGateway {
 public:
  explicit ScriptedBackend(std::vector<TapeEntry> tape, std::string id = "scripted");

  // Tape file: JSON array of {"match": {...}?, "response": <string|json>} or
  // {"match": {...}?, "fault": {"kind": "transport|rate_limited|refused", ...}}.
  // Non-string responses are returned as their compact JSON dump.
  static std::vector<TapeEntry> parse_tape(const Json& doc);
  static ScriptedBackend from_file(const std::filesystem::path& path);

  ModelResponse complete(const ModelRequest& request) override;
  std::string id() const override { return id_; }

  std::size_t call_count() const;
  std::size_t remaining() const;
  std::vector<ModelRequest> requests() const;

 private:
  mutable std::mutex mu_;
  std::vector<TapeEntry> tape_;
  std::vector<bool> consumed_;
  std::vector<ModelRequest> log_;
  std::string id_;
};

}  // namespace form57

#endif  // FORM57_SCRIPTED_BACKEND_HPP_
