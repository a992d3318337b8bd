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

#ifndef FORM57_KIE_HPP_
#define FORM57_KIE_HPP_

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "form57/gateway.hpp"
#include "form57/json_io.hpp"
#include "form57/prompts.hpp"
#include "form57/schema.hpp"

namespace form57 {

// The blank form page handed to the vision model.
struct FormDocument {
  std::filesystem::path path;
  ImagePart image;

  // Reads the file; mime type from the extension (png, jpg/jpeg, pdf).
  static FormDocument load(const std::filesystem::path& path);
};

struct KiePipelineConfig {
  int n_samples = 5;
  int max_validation_retries = 5;
  double sampling_temperature = 0.7;
  double merge_temperature = 0.0;
  int max_output_tokens = 16384;
  SchemaVariant variant = SchemaVariant::HumanCentric;
  // When false a single sample is taken per phase and used as-is (no merge
  // call); this is the "no sample aggregation" ablation.
  bool sample_aggregation = true;
  // Concurrent sample calls per phase; 0 means n_samples.
  int max_parallel = 0;
  RetryPolicy transport_retry;

  // Throws std::invalid_argument.
  void validate() const;
};

struct Transcription {
  FormSchema schema;
  SchemaVariant variant = SchemaVariant::HumanCentric;
  std::optional<int> sample_index;  // nullopt: merged result
  int attempts_used = 1;

  Json payload() const { return serialize_schema(schema, variant); }
  std::string provenance() const;
};

struct Grouping {
  GroupingAssignment assignment;
  std::optional<int> sample_index;  // nullopt: merged result
  int attempts_used = 1;
};

struct PhaseTelemetry {
  std::string phase;          // transcribe, merge_transcriptions, group, merge_groups
  std::vector<int> attempts;  // per sample, or a single entry for merges
  std::int64_t elapsed_ms = 0;
};

struct KieTrace {
  std::vector<PhaseTelemetry> phases;
  int total_attempts() const;
  Json to_json() const;
};

class ValidationRetriesExhausted : public std::runtime_error {
 public:
  ValidationRetriesExhausted(std::string phase, std::optional<int> sample_index, int attempts,
                             ValidationResult last);
  const std::string& phase() const noexcept { return phase_; }
  const std::optional<int>& sample_index() const noexcept { return sample_index_; }
  int attempts() const noexcept { return attempts_; }
  const ValidationResult& last_result() const noexcept { return last_; }

 private:
  std::string phase_;
  std::optional<int> sample_index_;
  int attempts_;
  ValidationResult last_;
};

// Raised by KiePipeline::run. Carries everything produced before the failure;
// in particular T_final survives a failure in the grouping phases.
class KieRunError : public std::runtime_error {
 public:
  KieRunError(std::string phase, std::optional<Transcription> t_final, KieTrace trace,
              std::exception_ptr cause, const std::string& message);
  const std::string& phase() const noexcept { return phase_; }
  const std::optional<Transcription>& transcription() const noexcept { return t_final_; }
  const KieTrace& trace() const noexcept { return trace_; }
  const std::exception_ptr& cause() const noexcept { return cause_; }

 private:
  std::string phase_;
  std::optional<Transcription> t_final_;
  KieTrace trace_;
  std::exception_ptr cause_;
};

struct KieResult {
  Transcription transcription;  // T_final
  Grouping grouping;            // G_final
  KieTrace trace;
};

// Sample -> merge -> group sample -> group merge. Every model output is
// validated and regenerated until it passes, up to max_validation_retries.
class KiePipeline {
 public:
  KiePipeline(ModelGateway& gateway, KiePipelineConfig config,
              const PromptSet& prompts = PromptSet::builtin());

  std::vector<Transcription> generate_transcription_samples(const FormDocument& doc) const;
  Transcription merge_transcriptions(const FormDocument& doc, const std::vector<Transcription>& samples) const;
  std::vector<Grouping> generate_grouping_samples(const FormDocument& doc, const Transcription& t_final) const;
  Grouping merge_groupings(const FormDocument& doc, const Transcription& t_final,
                           const std::vector<Grouping>& samples) const;

  KieResult run(const FormDocument& doc) const;

  const KiePipelineConfig& config() const noexcept { return config_; }

 private:
  ModelRequest make_request(ModelRole role, std::string label, const std::string& system,
                            std::string user, const FormDocument& doc, double temperature) const;

  ModelGateway& gateway_;
  KiePipelineConfig config_;
  const PromptSet& prompts_;
};

class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KieErrorReport {
  int errors = 0;
  std::vector<std::string> erroneous_field_ids;  // in gold order
  int total_fields = 0;
};

// A field is one error when any of its transcribed content differs from the
// gold field, however many answer places or choices differ. Comparison
// ignores whitespace differences, choice-code case and place/choice order.
// Throws SchemaMismatch when the field id sets differ.
KieErrorReport count_kie_errors(const Transcription& predicted, const Transcription& gold);

}  // namespace form57

#endif  // FORM57_KIE_HPP_
