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

#include "form57/scripted_backend.hpp"

#include <algorithm>

namespace form57 {

bool TapeMatch::matches(const ModelRequest& request) const {
  if (role && *role != request.role) return false;
  if (label && *label != request.label) return false;
  if (label_prefix && !request.label.starts_with(*label_prefix)) return false;
  if (contains && request.joined_text().find(*contains) == std::string::npos) return false;
  if (image_digest) {
    const bool found = std::any_of(request.user_parts.begin(), request.user_parts.end(), [&](const UserPart& p) {
      const auto* image = std::get_if<ImagePart>(&p);
      return image != nullptr && image->digest() == *image_digest;
    });
    if (!found) return false;
  }
  return true;
}

ScriptedBackend::ScriptedBackend(std::vector<TapeEntry> tape, std::string id)
    : tape_(std::move(tape)), consumed_(tape_.size(), false), id_(std::move(id)) {}

std::vector<TapeEntry> ScriptedBackend::parse_tape(const Json& doc) {
  if (!doc.is_array()) throw std::invalid_argument("tape must be a JSON array");
  std::vector<TapeEntry> tape;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const Json& e = doc[i];
    const std::string where = "tape entry " + std::to_string(i);
    if (!e.is_object()) throw std::invalid_argument(where + ": expected an object");
    TapeEntry entry;
    if (e.contains("match")) {
      const Json& m = e["match"];
      if (!m.is_object()) throw std::invalid_argument(where + ": match must be an object");
      if (m.contains("role")) {
        entry.match.role = model_role_from_string(m["role"].get<std::string>());
        if (!entry.match.role) throw std::invalid_argument(where + ": unknown role");
      }
      if (m.contains("label")) entry.match.label = m["label"].get<std::string>();
      if (m.contains("label_prefix")) entry.match.label_prefix = m["label_prefix"].get<std::string>();
      if (m.contains("contains")) entry.match.contains = m["contains"].get<std::string>();
      if (m.contains("image_digest")) entry.match.image_digest = m["image_digest"].get<std::string>();
    }
    const bool has_response = e.contains("response");
    const bool has_fault = e.contains("fault");
    if (has_response == has_fault) {
      throw std::invalid_argument(where + ": exactly one of response or fault is required");
    }
    if (has_response) {
      const Json& r = e["response"];
      entry.outcome = r.is_string() ? r.get<std::string>() : r.dump();
    } else {
      const Json& f = e["fault"];
      TapeFault fault;
      const std::string kind = f.value("kind", "transport");
      if (kind == "transport") {
        fault.kind = TapeFault::Kind::Transport;
      } else if (kind == "rate_limited") {
        fault.kind = TapeFault::Kind::RateLimited;
      } else if (kind == "refused") {
        fault.kind = TapeFault::Kind::Refused;
      } else {
        throw std::invalid_argument(where + ": unknown fault kind " + kind);
      }
      fault.retry_after = std::chrono::milliseconds(f.value("retry_after_ms", 0));
      fault.status = f.value("status", 500);
      fault.body = f.value("body", std::string());
      entry.outcome = fault;
    }
    tape.push_back(std::move(entry));
  }
  return tape;
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  try {
    return ScriptedBackend(parse_tape(read_json_file(path)), "scripted:" + path.filename().string());
  } catch (const std::invalid_argument& e) {
    throw FileError(path, e.what());
  }
}

ModelResponse ScriptedBackend::complete(const ModelRequest& request) {
  check_request(request);
  std::variant<std::string, TapeFault> outcome;
  {
    std::lock_guard lock(mu_);
    log_.push_back(request);
    std::size_t pick = tape_.size();
    for (std::size_t i = 0; i < tape_.size(); ++i) {
      if (!consumed_[i] && tape_[i].match.matches(request)) {
        pick = i;
        break;
      }
    }
    if (pick == tape_.size()) {
      const bool exhausted = std::all_of(consumed_.begin(), consumed_.end(), [](bool c) { return c; });
      throw TapeError(std::string(exhausted ? "scripted tape exhausted" : "no tape entry matches request") +
                      " (call " + std::to_string(log_.size()) + ", label \"" + request.label + "\")");
    }
    consumed_[pick] = true;
    outcome = tape_[pick].outcome;
  }
  if (const auto* text = std::get_if<std::string>(&outcome)) {
    return ModelResponse{*text, id_, 0};
  }
  const auto& fault = std::get<TapeFault>(outcome);
  switch (fault.kind) {
    case TapeFault::Kind::RateLimited:
      throw RateLimited(fault.retry_after);
    case TapeFault::Kind::Refused:
      throw BackendRefused(fault.status, fault.body);
    case TapeFault::Kind::Transport:
      break;
  }
  throw TransportError("scripted transport fault" + (fault.body.empty() ? "" : ": " + fault.body));
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

std::size_t ScriptedBackend::remaining() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), false));
}

std::vector<ModelRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace form57
