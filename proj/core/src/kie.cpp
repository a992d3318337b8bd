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

#include "form57/kie.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <tuple>

#include "form57/parallel.hpp"
#include "form57/text.hpp"

namespace form57 {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

std::string mime_for(const std::filesystem::path& path) {
  const std::string ext = text::casefold(path.extension().string());
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".pdf") return "application/pdf";
  if (ext == ".webp") return "image/webp";
  return "image/png";
}

// Runs `produce` until `check` accepts its JSON payload or the budget runs
// out. Returns the accepted payload and the number of attempts used.
template <typename Check>
std::pair<Json, int> generate_validated(ModelGateway& gateway, const ModelRequest& request,
                                        const KiePipelineConfig& cfg, const std::string& phase,
                                        std::optional<int> sample_index, Check&& check) {
  ValidationResult last;
  for (int attempt = 1; attempt <= cfg.max_validation_retries; ++attempt) {
    const ModelResponse response = complete_with_retry(gateway, request, cfg.transport_retry);
    auto payload = extract_json_payload(response.text);
    if (!payload) {
      last = ValidationResult{{{"", "response contains no parseable JSON"}}};
      continue;
    }
    last = check(*payload);
    if (last.ok()) return {std::move(*payload), attempt};
  }
  throw ValidationRetriesExhausted(phase, sample_index, cfg.max_validation_retries, std::move(last));
}

std::size_t parallelism(const KiePipelineConfig& cfg) {
  return static_cast<std::size_t>(cfg.max_parallel > 0 ? cfg.max_parallel : cfg.n_samples);
}

// Canonical, order-insensitive view of a field for error counting.
using PlaceView = std::tuple<AnswerType, std::map<std::string, std::string>>;
using FieldView = std::pair<std::string, std::map<std::string, PlaceView>>;

FieldView view_of(const FormField& field) {
  FieldView view{text::collapse_whitespace(field.name), {}};
  for (const auto& place : field.answer_places) {
    std::map<std::string, std::string> choices;
    for (const auto& c : place.choices.entries()) {
      choices[text::casefold(text::trim(c.code))] = text::collapse_whitespace(c.label);
    }
    view.second[text::collapse_whitespace(place.name)] = {place.answer_type, std::move(choices)};
  }
  return view;
}

}  // namespace

FormDocument FormDocument::load(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw FileError(path, "form image not found");
  return FormDocument{path, ImagePart{read_text_file(path), mime_for(path)}};
}

void KiePipelineConfig::validate() const {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  if (max_validation_retries < 1) throw std::invalid_argument("max_validation_retries must be >= 1");
  if (sampling_temperature < 0 || merge_temperature < 0) throw std::invalid_argument("temperatures must be >= 0");
  if (max_parallel < 0) throw std::invalid_argument("max_parallel must be >= 0");
  if (transport_retry.max_attempts < 1) throw std::invalid_argument("transport retry max_attempts must be >= 1");
}

std::string Transcription::provenance() const {
  return sample_index ? "sample " + std::to_string(*sample_index) : "merged";
}

int KieTrace::total_attempts() const {
  int total = 0;
  for (const auto& p : phases) {
    for (int a : p.attempts) total += a;
  }
  return total;
}

Json KieTrace::to_json() const {
  Json phases_json = Json::array();
  for (const auto& p : phases) {
    phases_json.push_back({{"phase", p.phase}, {"attempts", p.attempts}, {"elapsed_ms", p.elapsed_ms}});
  }
  return Json{{"phases", std::move(phases_json)}, {"total_attempts", total_attempts()}};
}

ValidationRetriesExhausted::ValidationRetriesExhausted(std::string phase, std::optional<int> sample_index,
                                                       int attempts, ValidationResult last)
    : std::runtime_error(phase + (sample_index ? " sample " + std::to_string(*sample_index) : std::string()) +
                         ": no valid output after " + std::to_string(attempts) +
                         " attempt(s); last problem: " + last.summary(3)),
      phase_(std::move(phase)),
      sample_index_(sample_index),
      attempts_(attempts),
      last_(std::move(last)) {}

KieRunError::KieRunError(std::string phase, std::optional<Transcription> t_final, KieTrace trace,
                         std::exception_ptr cause, const std::string& message)
    : std::runtime_error("KIE failed in phase " + phase + ": " + message),
      phase_(std::move(phase)),
      t_final_(std::move(t_final)),
      trace_(std::move(trace)),
      cause_(std::move(cause)) {}

KiePipeline::KiePipeline(ModelGateway& gateway, KiePipelineConfig config, const PromptSet& prompts)
    : gateway_(gateway), config_(std::move(config)), prompts_(prompts) {
  config_.validate();
}

ModelRequest KiePipeline::make_request(ModelRole role, std::string label, const std::string& system,
                                       std::string user, const FormDocument& doc, double temperature) const {
  ModelRequest request;
  request.role = role;
  request.label = std::move(label);
  request.system_prompt = system;
  request.user_parts.emplace_back(TextPart{std::move(user)});
  request.user_parts.emplace_back(doc.image);
  request.temperature = temperature;
  request.max_output_tokens = config_.max_output_tokens;
  request.response_format = ResponseFormat::JsonObject;
  return request;
}

std::vector<Transcription> KiePipeline::generate_transcription_samples(const FormDocument& doc) const {
  const int n = config_.sample_aggregation ? config_.n_samples : 1;
  const std::string shape = prompts_.get(config_.variant == SchemaVariant::Naive ? "shape.naive" : "shape.human_centric");
  const std::string user = prompts_.render("transcribe.user", {{"shape", shape}});
  std::vector<std::optional<Transcription>> slots(static_cast<std::size_t>(n));
  parallel_for(slots.size(), parallelism(config_), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    const ModelRequest request = make_request(ModelRole::Transcriber, "kie.transcribe#" + std::to_string(i),
                                              prompts_.get("transcribe.system"), user, doc,
                                              config_.sampling_temperature);
    auto [payload, attempts] = generate_validated(gateway_, request, config_, "transcribe", index, [&](const Json& p) {
      return validate_transcription_format(p, config_.variant);
    });
    slots[i] = Transcription{parse_schema(payload, config_.variant), config_.variant, index, attempts};
  });
  std::vector<Transcription> samples;
  for (auto& s : slots) samples.push_back(std::move(*s));
  return samples;
}

Transcription KiePipeline::merge_transcriptions(const FormDocument& doc,
                                                const std::vector<Transcription>& samples) const {
  if (samples.empty()) throw std::invalid_argument("merge_transcriptions needs at least one sample");
  std::string rendered;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rendered += "Transcription " + std::to_string(i + 1) + ":\n" + samples[i].payload().dump(2) + "\n";
  }
  const std::string shape = prompts_.get(config_.variant == SchemaVariant::Naive ? "shape.naive" : "shape.human_centric");
  const std::string user = prompts_.render(
      "merge_transcriptions.user",
      {{"count", std::to_string(samples.size())}, {"shape", shape}, {"samples", rendered}});
  const ModelRequest request = make_request(ModelRole::Merger, "kie.merge_transcriptions",
                                            prompts_.get("merge_transcriptions.system"), user, doc,
                                            config_.merge_temperature);
  auto [payload, attempts] = generate_validated(gateway_, request, config_, "merge_transcriptions", std::nullopt,
                                                [&](const Json& p) { return validate_transcription_format(p, config_.variant); });
  return Transcription{parse_schema(payload, config_.variant), config_.variant, std::nullopt, attempts};
}

std::vector<Grouping> KiePipeline::generate_grouping_samples(const FormDocument& doc,
                                                             const Transcription& t_final) const {
  const int n = config_.sample_aggregation ? config_.n_samples : 1;
  const std::string user = prompts_.render("group.user", {{"transcription", t_final.payload().dump(2)}});
  std::vector<std::optional<Grouping>> slots(static_cast<std::size_t>(n));
  parallel_for(slots.size(), parallelism(config_), [&](std::size_t i) {
    const int index = static_cast<int>(i);
    const ModelRequest request = make_request(ModelRole::Grouper, "kie.group#" + std::to_string(i),
                                              prompts_.get("group.system"), user, doc, config_.sampling_temperature);
    auto [payload, attempts] = generate_validated(gateway_, request, config_, "group", index, [&](const Json& p) {
      return validate_groups_format(p, t_final.schema);
    });
    slots[i] = Grouping{parse_grouping(payload, t_final.schema), index, attempts};
  });
  std::vector<Grouping> samples;
  for (auto& s : slots) samples.push_back(std::move(*s));
  return samples;
}

Grouping KiePipeline::merge_groupings(const FormDocument& doc, const Transcription& t_final,
                                      const std::vector<Grouping>& samples) const {
  if (samples.empty()) throw std::invalid_argument("merge_groupings needs at least one sample");
  std::string rendered;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rendered += "Grouping " + std::to_string(i + 1) + ":\n" + serialize_grouping(samples[i].assignment).dump(2) + "\n";
  }
  const std::string user = prompts_.render("merge_groups.user", {{"transcription", t_final.payload().dump(2)},
                                                                 {"count", std::to_string(samples.size())},
                                                                 {"samples", rendered}});
  const ModelRequest request = make_request(ModelRole::Merger, "kie.merge_groups", prompts_.get("merge_groups.system"),
                                            user, doc, config_.merge_temperature);
  auto [payload, attempts] = generate_validated(gateway_, request, config_, "merge_groups", std::nullopt,
                                                [&](const Json& p) { return validate_groups_format(p, t_final.schema); });
  return Grouping{parse_grouping(payload, t_final.schema), std::nullopt, attempts};
}

KieResult KiePipeline::run(const FormDocument& doc) const {
  KieTrace trace;
  std::optional<Transcription> t_final;
  std::string phase = "transcribe";
  try {
    auto start = Clock::now();
    std::vector<Transcription> samples = generate_transcription_samples(doc);
    PhaseTelemetry sampled{"transcribe", {}, ms_since(start)};
    for (const auto& s : samples) sampled.attempts.push_back(s.attempts_used);
    trace.phases.push_back(std::move(sampled));

    if (config_.sample_aggregation) {
      phase = "merge_transcriptions";
      start = Clock::now();
      t_final = merge_transcriptions(doc, samples);
      trace.phases.push_back({phase, {t_final->attempts_used}, ms_since(start)});
    } else {
      t_final = std::move(samples.front());
    }

    phase = "group";
    start = Clock::now();
    std::vector<Grouping> groupings = generate_grouping_samples(doc, *t_final);
    PhaseTelemetry grouped{"group", {}, ms_since(start)};
    for (const auto& g : groupings) grouped.attempts.push_back(g.attempts_used);
    trace.phases.push_back(std::move(grouped));

    Grouping g_final;
    if (config_.sample_aggregation) {
      phase = "merge_groups";
      start = Clock::now();
      g_final = merge_groupings(doc, *t_final, groupings);
      trace.phases.push_back({phase, {g_final.attempts_used}, ms_since(start)});
    } else {
      g_final = std::move(groupings.front());
    }
    return KieResult{std::move(*t_final), std::move(g_final), std::move(trace)};
  } catch (const std::exception& e) {
    throw KieRunError(phase, std::move(t_final), std::move(trace), std::current_exception(), e.what());
  }
}

KieErrorReport count_kie_errors(const Transcription& predicted, const Transcription& gold) {
  const auto& gold_fields = gold.schema.fields();
  std::set<std::string> gold_ids;
  std::set<std::string> pred_ids;
  for (const auto& f : gold_fields) gold_ids.insert(f.field_id);
  for (const auto& f : predicted.schema.fields()) pred_ids.insert(f.field_id);
  if (gold_ids != pred_ids) {
    std::vector<std::string> diff;
    std::set_symmetric_difference(gold_ids.begin(), gold_ids.end(), pred_ids.begin(), pred_ids.end(),
                                  std::back_inserter(diff));
    std::string listed;
    for (const auto& id : diff) listed += (listed.empty() ? "" : ", ") + id;
    throw SchemaMismatch("field id sets differ: " + listed);
  }
  KieErrorReport report;
  report.total_fields = static_cast<int>(gold_fields.size());
  for (const auto& gold_field : gold_fields) {
    const FormField* pred_field = predicted.schema.find(gold_field.field_id);
    if (view_of(*pred_field) != view_of(gold_field)) report.erroneous_field_ids.push_back(gold_field.field_id);
  }
  report.errors = static_cast<int>(report.erroneous_field_ids.size());
  return report;
}

}  // namespace form57
