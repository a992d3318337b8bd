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

#include "form57/http_backend.hpp"

#include <cstdlib>
#include <regex>

#include <openssl/evp.h>

#include "httplib.h"

#include "form57/text.hpp"

namespace form57 {
namespace {

std::string base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace

const std::string& HttpBackendConfig::model_for(ModelRole role) const {
  auto it = models.find(role);
  return it == models.end() ? default_model : it->second;
}

void HttpBackendConfig::apply_environment() {
  if (endpoint.empty()) {
    if (const char* e = std::getenv("MODEL_ENDPOINT")) endpoint = e;
  }
  if (api_key.empty()) {
    if (const char* k = std::getenv("MODEL_API_KEY")) api_key = k;
  }
}

Json build_chat_completion_body(const ModelRequest& request, const std::string& model) {
  Json content = Json::array();
  for (const auto& part : request.user_parts) {
    if (const auto* t = std::get_if<TextPart>(&part)) {
      content.push_back({{"type", "text"}, {"text", t->text}});
    } else {
      const auto& image = std::get<ImagePart>(part);
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + image.mime_type + ";base64," + base64(image.bytes)}}}});
    }
  }
  Json messages = Json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  Json body{{"model", model},
            {"messages", std::move(messages)},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens}};
  if (request.response_format == ResponseFormat::JsonObject) {
    body["response_format"] = {{"type", "json_object"}};
  }
  return body;
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw std::invalid_argument("model endpoint must be an http(s) URL, got \"" + config_.endpoint + "\"");
  }
  scheme_host_port_ = m[1];
  base_path_ = m[2].matched ? m[2].str() : "";
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
  check_request(request);
  const auto started = std::chrono::steady_clock::now();

  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.connect_timeout);
  client.set_read_timeout(config_.read_timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const std::string body = build_chat_completion_body(request, config_.model_for(request.role)).dump();
  auto result = client.Post(base_path_ + "/chat/completions", headers, body, "application/json");
  if (!result) {
    throw TransportError("POST " + scheme_host_port_ + base_path_ + "/chat/completions failed: " +
                         httplib::to_string(result.error()));
  }
  if (result->status == 429) {
    std::chrono::milliseconds retry_after{0};
    if (result->has_header("Retry-After")) {
      if (auto secs = text::first_number(result->get_header_value("Retry-After"))) {
        retry_after = std::chrono::milliseconds(static_cast<std::int64_t>(*secs * 1000));
      }
    }
    throw RateLimited(retry_after);
  }
  if (result->status < 200 || result->status >= 300) {
    throw BackendRefused(result->status, text::excerpt(result->body, 200));
  }

  std::string content;
  try {
    const Json reply = Json::parse(result->body);
    const Json& message = reply.at("choices").at(0).at("message");
    if (message.contains("content") && message["content"].is_string()) content = message["content"];
  } catch (const Json::exception& e) {
    throw TransportError(std::string("malformed chat-completions reply: ") + e.what());
  }
  const auto elapsed = std::chrono::steady_clock::now() - started;
  return ModelResponse{std::move(content), id(),
                       std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count()};
}

}  // namespace form57
