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

#ifndef FORM57_HTTP_BACKEND_HPP_
#define FORM57_HTTP_BACKEND_HPP_

#include <chrono>
#include <map>
#include <string>

#include "form57/gateway.hpp"
#include "form57/json_io.hpp"

namespace form57 {

struct HttpBackendConfig {
  // Base URL of an OpenAI-compatible API, e.g. "https://api.openai.com/v1".
  // Requests go to <endpoint>/chat/completions.
  std::string endpoint;
  std::string api_key;
  std::string default_model = "gpt-4o-mini";
  std::map<ModelRole, std::string> models;
  std::chrono::seconds connect_timeout{10};
  std::chrono::seconds read_timeout{300};

  const std::string& model_for(ModelRole role) const;

  // Fills endpoint/api_key from MODEL_ENDPOINT / MODEL_API_KEY when unset.
  void apply_environment();
};

// Builds the chat-completions request body. Exposed for wire-format tests.
Json build_chat_completion_body(const ModelRequest& request, const std::string& model);

// Live chat-completions backend over HTTP(S).
class HttpBackend : public ModelGateway {
 public:
  explicit HttpBackend(HttpBackendConfig config);

  ModelResponse complete(const ModelRequest& request) override;
  std::string id() const override { return "live:" + config_.endpoint; }

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string base_path_;
};

}  // namespace form57

#endif  // FORM57_HTTP_BACKEND_HPP_
