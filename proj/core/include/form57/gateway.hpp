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

#ifndef FORM57_GATEWAY_HPP_
#define FORM57_GATEWAY_HPP_

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace form57 {

// Which pipeline step issues a request; backends route models by role.
enum class ModelRole { Transcriber, Merger, Grouper, Qa, Judge };

std::string_view to_string(ModelRole role);
std::optional<ModelRole> model_role_from_string(std::string_view s);

struct TextPart {
  std::string text;
};

struct ImagePart {
  std::string bytes;
  std::string mime_type = "image/png";

  // Lower-case hex SHA-256 of `bytes`.
  std::string digest() const;
};

using UserPart = std::variant<TextPart, ImagePart>;

enum class ResponseFormat { FreeText, JsonObject };

struct ModelRequest {
  ModelRole role = ModelRole::Qa;
  // Local routing tag such as "kie.transcribe#2"; never sent to a backend.
  std::string label;
  std::string system_prompt;
  std::vector<UserPart> user_parts;
  double temperature = 0.0;
  int max_output_tokens = 4096;
  ResponseFormat response_format = ResponseFormat::FreeText;

  // System prompt and all text parts joined by newlines.
  std::string joined_text() const;
};

struct ModelResponse {
  std::string text;
  std::string backend_id;
  std::int64_t latency_ms = 0;
};

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual bool retryable() const noexcept { return true; }
};

class TransportError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class RateLimited : public GatewayError {
 public:
  explicit RateLimited(std::chrono::milliseconds retry_after)
      : GatewayError("rate limited; retry after " + std::to_string(retry_after.count()) + " ms"),
        retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const noexcept { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

// Non-success HTTP status from the backend. 5xx is retryable, 4xx is not.
class BackendRefused : public GatewayError {
 public:
  BackendRefused(int status, std::string body_excerpt)
      : GatewayError("backend refused request: HTTP " + std::to_string(status) + ": " + body_excerpt),
        status_(status),
        body_excerpt_(std::move(body_excerpt)) {}
  int status() const noexcept { return status_; }
  const std::string& body_excerpt() const noexcept { return body_excerpt_; }
  bool retryable() const noexcept override { return status_ >= 500; }

 private:
  int status_;
  std::string body_excerpt_;
};

class RetriesExhausted : public GatewayError {
 public:
  RetriesExhausted(int attempts, std::exception_ptr last, const std::string& last_message)
      : GatewayError("gave up after " + std::to_string(attempts) + " attempt(s): " + last_message),
        attempts_(attempts),
        last_(std::move(last)) {}
  int attempts() const noexcept { return attempts_; }
  const std::exception_ptr& last_error() const noexcept { return last_; }
  bool retryable() const noexcept override { return false; }

 private:
  int attempts_;
  std::exception_ptr last_;
};

// Chat-completion backend. Implementations must be safe to call from many
// threads at once and must return the backend text verbatim.
class ModelGateway {
 public:
  virtual ~ModelGateway() = default;
  virtual ModelResponse complete(const ModelRequest& request) = 0;
  virtual std::string id() const = 0;
};

// Throws std::invalid_argument when the request breaks its invariants.
void check_request(const ModelRequest& request);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

void sleep_for(std::chrono::milliseconds delay);

// Calls `gateway` at most policy.max_attempts times, backing off exponentially
// between retryable failures (RateLimited waits at least its retry-after).
// Non-retryable gateway errors propagate unchanged.
ModelResponse complete_with_retry(ModelGateway& gateway, const ModelRequest& request,
                                  const RetryPolicy& policy, const Sleeper& sleep = sleep_for);

}  // namespace form57

#endif  // FORM57_GATEWAY_HPP_
