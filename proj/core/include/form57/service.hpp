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

#ifndef FORM57_SERVICE_HPP_
#define FORM57_SERVICE_HPP_

#include <memory>
#include <string>

#include "form57/evaluation.hpp"
#include "form57/gateway.hpp"
#include "form57/json_io.hpp"
#include "form57/qa.hpp"
#include "form57/state_store.hpp"

namespace form57 {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  QaOptions qa;
  EvalOptions eval;
};

// JSON views shared by the HTTP handlers and the CLI.
Json incident_view(const StateStore& store, const std::string& article_id, TextJudge& judge,
                   const EvalOptions& options = {});
// Aggregated report over every article that has a form; articles without an
// annotation count as having no answerable places.
EvalReport store_report(const StateStore& store, TextJudge& judge, const EvalOptions& options = {});

// HTTP API under /api/v1:
//   GET  /incidents, GET /incidents/{id}
//   POST /incidents/{id}/groups/{group}/rerun
//   PUT  /incidents/{id}/annotations
//   GET  /schema, GET /report
// Errors are {"code", "message"} with 400, 404, 409 or 502.
class ReviewService {
 public:
  ReviewService(StateStore& store, ModelGateway& gateway, TextJudge& judge, ServiceOptions options = {});
  ~ReviewService();
  ReviewService(const ReviewService&) = delete;
  ReviewService& operator=(const ReviewService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace form57

#endif  // FORM57_SERVICE_HPP_
