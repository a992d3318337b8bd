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

#include "form57/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <set>

#include "form57/article.hpp"
#include "form57/evaluation.hpp"
#include "form57/linkage.hpp"
#include "form57/report_table.hpp"
#include "form57/scripted_backend.hpp"
#include "form57/service.hpp"
#include "form57/state_store.hpp"

namespace form57 {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.contains(it.key())) throw std::invalid_argument(where + ": unknown key \"" + it.key() + "\"");
  }
}

template <typename T>
void read_opt(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj[key].get<T>();
  } catch (const Json::exception&) {
    throw std::invalid_argument(where + "/" + key + ": wrong type");
  }
}

std::ostream& log_of(const CommandContext& ctx) { return ctx.log != nullptr ? *ctx.log : std::cerr; }

const PromptSet& prompts_for(const CliConfig& config, std::optional<PromptSet>& storage) {
  if (!config.prompts_path) return PromptSet::builtin();
  storage = PromptSet::from_file(*config.prompts_path);
  return *storage;
}

RunManifest start_manifest(const std::string& command, const CommandContext& ctx, const PromptSet& prompts) {
  RunManifest m;
  m.run_id = new_run_id();
  m.command = command;
  m.config = ctx.config.snapshot();
  m.prompts_version = prompts.version();
  m.prompts_source = prompts.source();
  m.backend = ctx.gateway != nullptr ? ctx.gateway->id() : "none";
  return m;
}

void write_artifact(RunManifest& m, const std::filesystem::path& path, const Json& doc) {
  write_json_atomic(path, doc);
  m.artifacts.push_back(path.string());
}

void write_artifact(RunManifest& m, const std::filesystem::path& path, const std::string& text) {
  write_text_atomic(path, text);
  m.artifacts.push_back(path.string());
}

void finish_manifest(const RunManifest& m, const std::filesystem::path& out_dir) {
  write_json_atomic(out_dir / ("manifest." + m.command + ".json"), m.to_json());
}

int fail(RunManifest& m, const std::filesystem::path& out_dir, const CommandContext& ctx, std::string phase,
         const std::string& message) {
  m.status = "failed";
  m.failed_phase = std::move(phase);
  m.error = message;
  log_of(ctx) << "error: " << message << "\n";
  try {
    finish_manifest(m, out_dir);
  } catch (const std::exception& e) {
    log_of(ctx) << "error: could not write manifest: " << e.what() << "\n";
  }
  return kExitFailure;
}

ModelGateway& need_gateway(const CommandContext& ctx) {
  if (ctx.gateway == nullptr) throw std::invalid_argument("this command needs a model backend");
  return *ctx.gateway;
}

std::string form_file(const std::string& id) { return id + ".form.json"; }

}  // namespace

CliConfig CliConfig::from_json(const Json& doc, const std::filesystem::path& base_dir) {
  CliConfig c;
  check_keys(doc, "config", {"kie", "qa", "retry", "backend", "prompts", "judge", "kie_model"});
  if (doc.contains("kie")) {
    const Json& k = doc["kie"];
    check_keys(k, "config/kie",
               {"n_samples", "max_validation_retries", "sampling_temperature", "merge_temperature",
                "max_output_tokens", "variant", "sample_aggregation", "max_parallel"});
    read_opt(k, "n_samples", c.kie.n_samples, "config/kie");
    read_opt(k, "max_validation_retries", c.kie.max_validation_retries, "config/kie");
    read_opt(k, "sampling_temperature", c.kie.sampling_temperature, "config/kie");
    read_opt(k, "merge_temperature", c.kie.merge_temperature, "config/kie");
    read_opt(k, "max_output_tokens", c.kie.max_output_tokens, "config/kie");
    read_opt(k, "sample_aggregation", c.kie.sample_aggregation, "config/kie");
    read_opt(k, "max_parallel", c.kie.max_parallel, "config/kie");
    if (k.contains("variant")) {
      auto v = k["variant"].is_string() ? schema_variant_from_string(k["variant"].get<std::string>()) : std::nullopt;
      if (!v) throw std::invalid_argument("config/kie/variant: expected naive or human-centric");
      c.kie.variant = *v;
    }
  }
  if (doc.contains("qa")) {
    check_keys(doc["qa"], "config/qa", {"max_parallel", "max_output_tokens"});
    read_opt(doc["qa"], "max_parallel", c.qa_max_parallel, "config/qa");
    read_opt(doc["qa"], "max_output_tokens", c.qa_max_output_tokens, "config/qa");
  }
  if (doc.contains("retry")) {
    const Json& r = doc["retry"];
    check_keys(r, "config/retry", {"max_attempts", "initial_backoff_ms", "multiplier", "max_backoff_ms"});
    read_opt(r, "max_attempts", c.retry.max_attempts, "config/retry");
    read_opt(r, "multiplier", c.retry.multiplier, "config/retry");
    std::int64_t ms = c.retry.initial_backoff.count();
    read_opt(r, "initial_backoff_ms", ms, "config/retry");
    c.retry.initial_backoff = std::chrono::milliseconds(ms);
    ms = c.retry.max_backoff.count();
    read_opt(r, "max_backoff_ms", ms, "config/retry");
    c.retry.max_backoff = std::chrono::milliseconds(ms);
    if (c.retry.max_attempts < 1) throw std::invalid_argument("config/retry/max_attempts must be >= 1");
  }
  c.kie.transport_retry = c.retry;
  if (doc.contains("backend")) {
    const Json& b = doc["backend"];
    check_keys(b, "config/backend", {"endpoint", "default_model", "models", "connect_timeout_s", "read_timeout_s"});
    read_opt(b, "endpoint", c.backend.endpoint, "config/backend");
    read_opt(b, "default_model", c.backend.default_model, "config/backend");
    if (b.contains("models")) {
      if (!b["models"].is_object()) throw std::invalid_argument("config/backend/models: expected an object");
      for (auto it = b["models"].begin(); it != b["models"].end(); ++it) {
        auto role = model_role_from_string(it.key());
        if (!role || !it->is_string()) throw std::invalid_argument("config/backend/models/" + it.key() + ": bad entry");
        c.backend.models[*role] = it->get<std::string>();
      }
    }
    std::int64_t s = c.backend.connect_timeout.count();
    read_opt(b, "connect_timeout_s", s, "config/backend");
    c.backend.connect_timeout = std::chrono::seconds(s);
    s = c.backend.read_timeout.count();
    read_opt(b, "read_timeout_s", s, "config/backend");
    c.backend.read_timeout = std::chrono::seconds(s);
  }
  if (doc.contains("prompts")) {
    std::string p;
    read_opt(doc, "prompts", p, "config");
    c.prompts_path = std::filesystem::path(p).is_relative() ? base_dir / p : std::filesystem::path(p);
  }
  if (doc.contains("judge")) {
    std::string j;
    read_opt(doc, "judge", j, "config");
    if (j != "offline" && j != "model") throw std::invalid_argument("config/judge: expected offline or model");
    c.model_judge = j == "model";
  }
  read_opt(doc, "kie_model", c.kie_model, "config");
  c.kie.validate();
  return c;
}

CliConfig CliConfig::load(const std::optional<std::filesystem::path>& path) {
  if (!path) return CliConfig{};
  try {
    return from_json(read_json_file(*path), path->parent_path());
  } catch (const std::invalid_argument& e) {
    throw FileError(*path, e.what());
  }
}

Json CliConfig::snapshot() const {
  Json models = Json::object();
  for (const auto& [role, model] : backend.models) models[std::string(to_string(role))] = model;
  return Json{
      {"kie",
       {{"n_samples", kie.n_samples},
        {"max_validation_retries", kie.max_validation_retries},
        {"sampling_temperature", kie.sampling_temperature},
        {"merge_temperature", kie.merge_temperature},
        {"max_output_tokens", kie.max_output_tokens},
        {"variant", std::string(to_string(kie.variant))},
        {"sample_aggregation", kie.sample_aggregation},
        {"max_parallel", kie.max_parallel}}},
      {"qa", {{"max_parallel", qa_max_parallel}, {"max_output_tokens", qa_max_output_tokens}}},
      {"retry",
       {{"max_attempts", retry.max_attempts},
        {"initial_backoff_ms", retry.initial_backoff.count()},
        {"multiplier", retry.multiplier},
        {"max_backoff_ms", retry.max_backoff.count()}}},
      {"backend",
       {{"endpoint", backend.endpoint},
        {"default_model", backend.default_model},
        {"models", std::move(models)},
        {"connect_timeout_s", backend.connect_timeout.count()},
        {"read_timeout_s", backend.read_timeout.count()}}},
      {"prompts", prompts_path ? Json(prompts_path->string()) : Json(nullptr)},
      {"judge", model_judge ? "model" : "offline"},
      {"kie_model", kie_model}};
}

QaOptions CliConfig::qa_options(const PromptSet& prompts) const {
  QaOptions o;
  o.retry = retry;
  o.max_parallel = qa_max_parallel;
  o.max_output_tokens = qa_max_output_tokens;
  o.prompts = &prompts;
  return o;
}

std::unique_ptr<ModelGateway> make_backend(const std::string& spec, const CliConfig& config) {
  if (spec == "live") {
    HttpBackendConfig cfg = config.backend;
    cfg.apply_environment();
    if (cfg.endpoint.empty()) throw std::invalid_argument("live backend needs MODEL_ENDPOINT or backend.endpoint");
    return std::make_unique<HttpBackend>(std::move(cfg));
  }
  constexpr std::string_view kScripted = "scripted:";
  if (spec.starts_with(kScripted)) {
    const std::filesystem::path tape = spec.substr(kScripted.size());
    return std::make_unique<ScriptedBackend>(ScriptedBackend::parse_tape(read_json_file(tape)),
                                             "scripted:" + tape.filename().string());
  }
  throw std::invalid_argument("backend must be live or scripted:<tape>, got \"" + spec + "\"");
}

Json RunManifest::to_json() const {
  Json phase_list = Json::array();
  for (const auto& p : phases) {
    phase_list.push_back({{"name", p.name}, {"attempts", p.attempts}, {"elapsed_ms", p.elapsed_ms}});
  }
  return Json{{"run_id", run_id},
              {"command", command},
              {"status", status},
              {"failed_phase", failed_phase ? Json(*failed_phase) : Json(nullptr)},
              {"error", error ? Json(*error) : Json(nullptr)},
              {"backend", backend},
              {"prompts", {{"version", prompts_version}, {"source", prompts_source}}},
              {"config", config},
              {"phases", std::move(phase_list)},
              {"artifacts", artifacts},
              {"warnings", warnings}};
}

std::string new_run_id() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::floor<std::chrono::seconds>(now);
  const auto day = std::chrono::floor<std::chrono::days>(secs);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{secs - day};
  static std::mt19937_64 rng{std::random_device{}()};
  static std::mutex mu;
  std::uint64_t suffix;
  {
    std::lock_guard lk(mu);
    suffix = rng();
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d%02u%02uT%02d%02d%02dZ-%08llx", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()), static_cast<unsigned long long>(suffix & 0xffffffffULL));
  return buf;
}

std::string pipeline_label(BatchingMode mode) {
  switch (mode) {
    case BatchingMode::Single:
      return "Single-field QA";
    case BatchingMode::All:
      return "All-fields QA";
    case BatchingMode::Group:
      return "Grouped QA";
  }
  return "Grouped QA";
}

int run_transcribe(const TranscribeArgs& args, const CommandContext& ctx) {
  std::optional<PromptSet> storage;
  const PromptSet& prompts = prompts_for(ctx.config, storage);
  RunManifest m = start_manifest("transcribe", ctx, prompts);
  FormDocument doc;
  try {
    doc = FormDocument::load(args.image);
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "load", e.what());
  }
  try {
    KiePipeline pipeline(need_gateway(ctx), ctx.config.kie, prompts);
    const KieResult result = pipeline.run(doc);
    for (const auto& p : result.trace.phases) m.phases.push_back({p.phase, p.attempts, p.elapsed_ms});
    write_artifact(m, args.out_dir / "T_final.json", result.transcription.payload());
    write_artifact(m, args.out_dir / "G_final.json", serialize_grouping(result.grouping.assignment));
  } catch (const KieRunError& e) {
    for (const auto& p : e.trace().phases) m.phases.push_back({p.phase, p.attempts, p.elapsed_ms});
    if (e.transcription()) write_artifact(m, args.out_dir / "T_final.json", e.transcription()->payload());
    return fail(m, args.out_dir, ctx, e.phase(), e.what());
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "transcribe", e.what());
  }
  finish_manifest(m, args.out_dir);
  return kExitOk;
}

int run_extract(const ExtractArgs& args, const CommandContext& ctx) {
  std::optional<PromptSet> storage;
  const PromptSet& prompts = prompts_for(ctx.config, storage);
  RunManifest m = start_manifest("extract", ctx, prompts);
  FormSchema schema;
  std::optional<GroupingAssignment> grouping;
  std::vector<std::string> ids;
  try {
    schema = load_schema_file(args.schema);
    if (args.grouping) {
      try {
        grouping = parse_grouping(read_json_file(*args.grouping), schema);
      } catch (const SchemaFormatError& e) {
        throw FileError(*args.grouping, e.what());
      }
    }
    if (args.mode == BatchingMode::Group && !grouping) throw std::invalid_argument("--mode group needs --grouping");
    ids = list_article_ids(args.articles_dir);
    need_gateway(ctx);
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "load", e.what());
  }

  const QaOptions options = ctx.config.qa_options(prompts);
  const auto start = Clock::now();
  Json calls = Json::object();
  for (const auto& id : ids) {
    ArticleDoc article;
    try {
      article = load_article(args.articles_dir, id);
    } catch (const std::exception& e) {
      m.warnings.push_back("skipped article " + id + ": " + e.what());
      log_of(ctx) << "warning: skipped article " << id << ": " << e.what() << "\n";
      continue;
    }
    try {
      const PopulatedForm form =
          populate_form(schema, grouping ? &*grouping : nullptr, article, args.mode, *ctx.gateway, options);
      write_artifact(m, args.out_dir / form_file(id), form_to_json(form));
    } catch (const std::exception& e) {
      m.warnings.push_back("no form for article " + id + ": " + e.what());
      log_of(ctx) << "warning: no form for article " << id << ": " << e.what() << "\n";
    }
  }
  m.phases.push_back({"qa", Json{{"articles", ids.size()}, {"forms", m.artifacts.size()}}, ms_since(start)});
  m.status = m.warnings.empty() ? "ok" : "partial";
  finish_manifest(m, args.out_dir);
  return m.warnings.empty() ? kExitOk : kExitPartial;
}

int run_link(const LinkArgs& args, const CommandContext& ctx) {
  std::optional<PromptSet> storage;
  RunManifest m = start_manifest("link", ctx, prompts_for(ctx.config, storage));
  std::vector<LinkageInput> inputs;
  FraLoadResult fra;
  try {
    fra = load_fra_csv(args.fra_csv);
    for (const auto& w : fra.warnings) m.warnings.push_back(args.fra_csv.string() + ": " + w);
    std::optional<Crosswalk> crosswalk;
    if (args.crosswalk) crosswalk = Crosswalk::from_file(*args.crosswalk);
    if (args.forms_dir && !crosswalk) throw std::invalid_argument("--forms needs --crosswalk to read cues");
    for (const auto& id : list_article_ids(args.articles_dir)) {
      LinkageInput input;
      try {
        input.article = load_article(args.articles_dir, id);
      } catch (const std::exception& e) {
        m.warnings.push_back("skipped article " + id + ": " + e.what());
        continue;
      }
      const auto form_path = args.forms_dir ? *args.forms_dir / form_file(id) : std::filesystem::path();
      if (args.forms_dir && std::filesystem::exists(form_path)) {
        // Forms only need to parse against their own places here.
        const Json doc = read_json_file(form_path);
        PopulatedForm form;
        form.article_id = id;
        for (auto it = doc.at("answers").begin(); it != doc.at("answers").end(); ++it) {
          auto key = PlaceKey::parse(it.key());
          if (!key) continue;
          const std::string kind = it->at("kind").get<std::string>();
          AnswerValue value = UnknownValue{};
          if (kind == "text") value = TextValue{it->at("value").get<std::string>()};
          if (kind == "digit") value = DigitValue{it->at("value").get<double>()};
          if (kind == "choice") value = ChoiceValue{it->at("value").get<std::string>()};
          form.answers.push_back({*key, std::move(value), ""});
        }
        input.extracted = cues_from_form(form, *crosswalk);
      }
      inputs.push_back(std::move(input));
    }
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "load", e.what());
  }
  const auto start = Clock::now();
  const LinkageReport report = build_linkage_report(inputs, fra.records);
  m.phases.push_back({"link",
                      Json{{"articles", inputs.size()},
                           {"records", fra.records.size()},
                           {"pairs", report.pairs.size()},
                           {"ambiguous", report.ambiguous.size()},
                           {"unmatched", report.unmatched_articles.size()}},
                      ms_since(start)});
  write_artifact(m, args.out_dir / "linkage.json", linkage_to_json(report));
  m.status = m.warnings.empty() ? "ok" : "partial";
  finish_manifest(m, args.out_dir);
  for (const auto& w : m.warnings) log_of(ctx) << "warning: " << w << "\n";
  return m.warnings.empty() ? kExitOk : kExitPartial;
}

int run_evaluate(const EvaluateArgs& args, const CommandContext& ctx) {
  std::optional<PromptSet> storage;
  const PromptSet& prompts = prompts_for(ctx.config, storage);
  RunManifest m = start_manifest("evaluate", ctx, prompts);
  if (args.forms_dirs.empty()) return fail(m, args.out_dir, ctx, "load", "at least one forms directory is required");

  FormSchema schema;
  LinkageReport linkage;
  std::map<std::string, FraRecord> records;
  std::optional<Crosswalk> crosswalk;
  try {
    schema = load_schema_file(args.schema);
    linkage = linkage_from_json(read_json_file(args.linkage));
    for (auto& r : load_fra_csv(args.fra_csv).records) records.emplace(r.record_id, std::move(r));
    crosswalk = Crosswalk::from_file(args.crosswalk);
    crosswalk->check_against(schema);
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "load", e.what());
  }

  OfflineTextJudge offline;
  std::unique_ptr<ModelTextJudge> model_judge;
  if (ctx.config.model_judge) {
    if (ctx.gateway == nullptr) return fail(m, args.out_dir, ctx, "load", "judge=model needs a backend");
    model_judge = std::make_unique<ModelTextJudge>(*ctx.gateway, ctx.config.retry, prompts);
  }
  TextJudge& judge = model_judge ? static_cast<TextJudge&>(*model_judge) : offline;
  EvalOptions eval_options;
  eval_options.max_parallel = ctx.config.qa_max_parallel;

  const auto start = Clock::now();
  std::vector<EvalReport> runs;
  std::optional<BatchingMode> mode;
  try {
    for (const auto& dir : args.forms_dirs) {
      std::vector<EvalReport> per_article;
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.is_regular_file() && name.ends_with(".form.json")) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        PopulatedForm form;
        try {
          form = form_from_json(read_json_file(file), schema);
        } catch (const SchemaFormatError& e) {
          throw FileError(file, e.what());
        }
        if (mode && *mode != form.batching_mode) {
          throw std::invalid_argument("forms mix batching modes; evaluate one configuration at a time");
        }
        mode = form.batching_mode;
        const auto ann_path = args.annotations_dir / (form.article_id + ".answerable.json");
        AnswerabilityAnnotation ann{form.article_id, {}};
        if (std::filesystem::exists(ann_path)) {
          ann = load_annotation(ann_path, form.article_id, schema);
        } else {
          m.warnings.push_back("no annotation for " + form.article_id);
        }
        const FraRecord* record = nullptr;
        if (const LinkedPair* p = linkage.find_pair(form.article_id)) {
          auto it = records.find(p->record_id);
          if (it != records.end()) record = &it->second;
        }
        per_article.push_back(compute_report(form, record, ann, schema, *crosswalk, judge, eval_options));
      }
      if (per_article.empty()) throw FileError(dir, "no *.form.json files");
      runs.push_back(aggregate_reports(per_article));
    }
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "evaluate", e.what());
  }
  m.phases.push_back({"evaluate", Json{{"runs", runs.size()}}, ms_since(start)});

  const EvalReport pooled = aggregate_reports(runs);
  const QaTableRow row{pipeline_label(*mode), ctx.config.kie_model, std::string(to_string(*mode)), summarize_runs(runs)};
  std::string text = "QA performance\n" + render_qa_table(std::span<const QaTableRow>(&row, 1));
  text += "\nAccuracy by answer type\n" + render_answer_type_table(pooled);
  text += "\nLowest-accuracy fields\n" + render_worst_fields(pooled, schema);
  text += "\nStrict accuracy (Unknown on an answerable place with ground truth counts as wrong): " +
          (pooled.strict_accuracy_defined ? format_ratio(pooled.strict_accuracy) : std::string("n/a")) + "\n";
  if (!pooled.accuracy_defined) text += "Accuracy undefined: no attempted place had ground truth; reported as 0.\n";
  if (!pooled.coverage_defined) text += "Coverage undefined: no answerable places were annotated; reported as 0.\n";

  Json doc = report_to_json(pooled);
  Json per_run = Json::array();
  for (const auto& r : runs) per_run.push_back({{"accuracy", r.accuracy}, {"coverage", r.coverage}});
  const RunSummary s = summarize_runs(runs);
  doc["runs"] = Json{{"count", s.runs},
                     {"per_run", std::move(per_run)},
                     {"accuracy_mean", s.accuracy_mean},
                     {"accuracy_std", s.accuracy_std},
                     {"coverage_mean", s.coverage_mean},
                     {"coverage_std", s.coverage_std},
                     {"std_kind", "population std-dev over repeated runs"}};
  doc["judge"] = judge.id();
  try {
    write_artifact(m, args.out_dir / "report.json", doc);
    write_artifact(m, args.out_dir / "report.txt", text);
  } catch (const std::exception& e) {
    return fail(m, args.out_dir, ctx, "write", e.what());
  }
  m.status = m.warnings.empty() ? "ok" : "partial";
  finish_manifest(m, args.out_dir);
  if (ctx.log != nullptr) *ctx.log << text;
  return kExitOk;
}

int run_serve(const ServeArgs& args, const CommandContext& ctx) {
  try {
    std::optional<PromptSet> storage;
    const PromptSet& prompts = prompts_for(ctx.config, storage);
    StateStore store(args.state_dir);
    OfflineTextJudge offline;
    std::unique_ptr<ModelTextJudge> model_judge;
    if (ctx.config.model_judge) model_judge = std::make_unique<ModelTextJudge>(need_gateway(ctx), ctx.config.retry, prompts);
    ServiceOptions options;
    options.host = args.host;
    options.port = args.port;
    options.qa = ctx.config.qa_options(prompts);
    ReviewService service(store, need_gateway(ctx), model_judge ? static_cast<TextJudge&>(*model_judge) : offline,
                          options);
    const int port = service.start();
    log_of(ctx) << "serving " << args.state_dir.string() << " on http://" << args.host << ":" << port << "/api/v1\n";
    service.wait();
  } catch (const std::exception& e) {
    log_of(ctx) << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace form57
