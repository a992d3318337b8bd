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

#ifndef FORM57_COMMANDS_HPP_
#define FORM57_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "form57/gateway.hpp"
#include "form57/http_backend.hpp"
#include "form57/json_io.hpp"
#include "form57/kie.hpp"
#include "form57/prompts.hpp"
#include "form57/qa.hpp"

namespace form57 {

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitPartial = 3 };

// Contents of the --config file. Every section is optional:
//   {"kie": {...}, "qa": {...}, "retry": {...}, "backend": {...},
//    "prompts": "path", "judge": "offline" | "model", "kie_model": "label"}
struct CliConfig {
  KiePipelineConfig kie;
  std::size_t qa_max_parallel = 4;
  int qa_max_output_tokens = 4096;
  RetryPolicy retry;
  HttpBackendConfig backend;
  std::optional<std::filesystem::path> prompts_path;
  bool model_judge = false;
  std::string kie_model = "-";

  // Throws std::invalid_argument on unknown keys or bad values.
  static CliConfig from_json(const Json& doc, const std::filesystem::path& base_dir = {});
  static CliConfig load(const std::optional<std::filesystem::path>& path);
  // Effective settings, without secrets.
  Json snapshot() const;
  QaOptions qa_options(const PromptSet& prompts) const;
};

// "live" or "scripted:<tape.json>".
std::unique_ptr<ModelGateway> make_backend(const std::string& spec, const CliConfig& config);

struct PhaseRecord {
  std::string name;
  Json attempts;
  std::int64_t elapsed_ms = 0;
};

struct RunManifest {
  std::string run_id;
  std::string command;
  Json config;
  std::string prompts_version;
  std::string prompts_source;
  std::string backend;
  std::vector<PhaseRecord> phases;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
  std::string status = "ok";  // ok, partial, failed
  std::optional<std::string> failed_phase;
  std::optional<std::string> error;

  Json to_json() const;
};

// Unique per call: UTC timestamp plus random suffix.
std::string new_run_id();

struct CommandContext {
  CliConfig config;
  ModelGateway* gateway = nullptr;  // not needed by link/evaluate with the offline judge
  std::ostream* log = nullptr;
};

struct TranscribeArgs {
  std::filesystem::path image;
  std::filesystem::path out_dir;
};
struct ExtractArgs {
  std::filesystem::path articles_dir;
  std::filesystem::path schema;
  std::optional<std::filesystem::path> grouping;
  BatchingMode mode = BatchingMode::Group;
  std::filesystem::path out_dir;
};
struct LinkArgs {
  std::filesystem::path articles_dir;
  std::filesystem::path fra_csv;
  std::optional<std::filesystem::path> forms_dir;  // cues read from extracted forms
  std::optional<std::filesystem::path> crosswalk;
  std::filesystem::path out_dir;
};
struct EvaluateArgs {
  std::vector<std::filesystem::path> forms_dirs;  // one directory per repeated run
  std::filesystem::path schema;
  std::filesystem::path linkage;
  std::filesystem::path fra_csv;
  std::filesystem::path annotations_dir;
  std::filesystem::path crosswalk;
  std::filesystem::path out_dir;
};
struct ServeArgs {
  std::filesystem::path state_dir;
  std::string host = "127.0.0.1";
  int port = 8057;
};

// Each writes its artifacts plus manifest.<command>.json into out_dir and
// returns an ExitCode.
int run_transcribe(const TranscribeArgs& args, const CommandContext& ctx);
int run_extract(const ExtractArgs& args, const CommandContext& ctx);
int run_link(const LinkArgs& args, const CommandContext& ctx);
int run_evaluate(const EvaluateArgs& args, const CommandContext& ctx);
int run_serve(const ServeArgs& args, const CommandContext& ctx);

// Row label of the QA table: "Single-field QA", "All-fields QA", "Grouped QA".
std::string pipeline_label(BatchingMode mode);

}  // namespace form57

#endif  // FORM57_COMMANDS_HPP_
