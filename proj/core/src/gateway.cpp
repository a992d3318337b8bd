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

#include "form57/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <openssl/evp.h>

namespace form57 {

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Transcriber:
      return "transcriber";
    case ModelRole::Merger:
      return "merger";
    case ModelRole::Grouper:
      return "grouper";
    case ModelRole::Qa:
      return "qa";
    case ModelRole::Judge:
      return "judge";
  }
  return "qa";
}

std::optional<ModelRole> model_role_from_string(std::string_view s) {
  for (auto role : {ModelRole::Transcriber, ModelRole::Merger, ModelRole::Grouper, ModelRole::Qa,
                    ModelRole::Judge}) {
    if (to_string(role) == s) return role;
  }
  return std::nullopt;
}

std::string ImagePart::digest() const {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0x0f]);
  }
  return out;
}

std::string ModelRequest::joined_text() const {
  std::string out = system_prompt;
  for (const auto& part : user_parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      if (!out.empty()) out.push_back('\n');
      out += t->text;
    }
  }
  return out;
}

void check_request(const ModelRequest& request) {
  if (request.user_parts.empty()) throw std::invalid_argument("model request has no user parts");
  if (!(request.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (request.max_output_tokens <= 0) throw std::invalid_argument("max_output_tokens must be positive");
}

void sleep_for(std::chrono::milliseconds delay) {
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
}

ModelResponse complete_with_retry(ModelGateway& gateway, const ModelRequest& request,
                                  const RetryPolicy& policy, const Sleeper& sleep) {
  if (policy.max_attempts < 1) throw std::invalid_argument("RetryPolicy.max_attempts must be >= 1");
  double backoff_ms = static_cast<double>(policy.initial_backoff.count());
  for (int attempt = 1;; ++attempt) {
    try {
      return gateway.complete(request);
    } catch (const GatewayError& e) {
      if (!e.retryable()) throw;
      if (attempt >= policy.max_attempts) {
        throw RetriesExhausted(attempt, std::current_exception(), e.what());
      }
      auto delay = std::chrono::milliseconds(static_cast<std::int64_t>(
          std::min(backoff_ms, static_cast<double>(policy.max_backoff.count()))));
      if (const auto* limited = dynamic_cast<const RateLimited*>(&e)) {
        delay = std::max(delay, limited->retry_after());
      }
      sleep(delay);
      backoff_ms *= policy.multiplier;
    }
  }
}

}  // namespace form57
