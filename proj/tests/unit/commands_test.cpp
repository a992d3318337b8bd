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


#include <gtest/gtest.h>

#include <regex>
#include <set>

#include "e2e_run.hpp"
#include "form57/commands.hpp"
#include "form57/evaluation.hpp"
#include "test_support.hpp"

namespace form57 {
namespace {

using testing::CountingGateway;
using testing::data_dir;
using testing::fixture_dir;
using testing::TempDir;

TEST(EndToEndTest, MatchesGoldenArtifacts) {
  TempDir out;
  const testing::E2eRun run = testing::run_e2e(out.path());
  EXPECT_EQ(run.extract_exit, kExitOk) << run.log;
  EXPECT_EQ(run.link_exit, kExitOk) << run.log;
  EXPECT_EQ(run.evaluate_exit, kExitOk) << run.log;
  EXPECT_EQ(run.qa_calls, 12u);
  EXPECT_EQ(run.tape_left, 0u);
  for (const auto& name : testing::golden_artifacts()) {
    EXPECT_EQ(read_text_file(out / name), read_text_file(testing::golden_dir() / name)) << name;
  }
}

TEST(EndToEndTest, RepeatRunsAreIdentical) {
  TempDir a, b;
  testing::run_e2e(a.path());
  testing::run_e2e(b.path());
  for (const auto& name : testing::golden_artifacts()) EXPECT_EQ(read_text_file(a / name), read_text_file(b / name)) << name;
}

TEST(EndToEndTest, ManifestsDescribeTheRun) {
  TempDir out;
  testing::run_e2e(out.path());
  const Json m = read_json_file(out / "forms" / "manifest.extract.json");
  EXPECT_EQ(m["command"], "extract");
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["backend"], "scripted:qa_group_tape.json");
  EXPECT_TRUE(std::regex_match(m["run_id"].get<std::string>(), std::regex(R"(\d{8}T\d{6}Z-[0-9a-f]{8})")));
  EXPECT_EQ(m["artifacts"].size(), 2u);
  EXPECT_EQ(m["config"]["kie_model"], "fixture");
  EXPECT_FALSE(m["prompts"]["version"].get<std::string>().empty());
  EXPECT_EQ(read_json_file(out / "eval" / "manifest.evaluate.json")["backend"], "none");
}

TEST(ExtractCommandTest, CallCountsPerMode) {
  const std::vector<std::pair<BatchingMode, std::size_t>> cases{
      {BatchingMode::Single, 2 * 66}, {BatchingMode::All, 2}, {BatchingMode::Group, 2 * 6}};
  for (const auto& [mode, expected] : cases) {
    TempDir out;
    CountingGateway gw;
    std::ostringstream log;
    CommandContext ctx{CliConfig{}, &gw, &log};
    const int code = run_extract(ExtractArgs{fixture_dir() / "e2e" / "articles", data_dir() / "form57.schema.json",
                                             data_dir() / "form57.groups.json", mode, out.path()},
                                 ctx);
    EXPECT_EQ(code, kExitOk) << log.str();
    EXPECT_EQ(gw.calls(), expected) << to_string(mode);
    EXPECT_EQ(form_from_json(read_json_file(out / "A01.form.json"), testing::form57_schema()).batching_mode, mode);
  }
}

TEST(ExtractCommandTest, GroupModeWithoutGroupingFails) {
  TempDir out;
  CountingGateway gw;
  std::ostringstream log;
  CommandContext ctx{CliConfig{}, &gw, &log};
  const int code = run_extract(
      ExtractArgs{fixture_dir() / "e2e" / "articles", data_dir() / "form57.schema.json", std::nullopt,
                  BatchingMode::Group, out.path()},
      ctx);
  EXPECT_EQ(code, kExitFailure);
  const Json m = read_json_file(out / "manifest.extract.json");
  EXPECT_EQ(m["status"], "failed");
  EXPECT_EQ(m["failed_phase"], "load");
  EXPECT_EQ(gw.calls(), 0u);
}

TEST(ExtractCommandTest, PartialSuccessKeepsGoodForms) {
  TempDir out;
  TapeEntry ok{{}, std::string(R"({"9/County name": "Harris"})")};
  ok.match.contains = "Houston Chronicle";
  TapeFault refused;
  refused.kind = TapeFault::Kind::Refused;
  refused.status = 400;
  ScriptedBackend backend({ok, TapeEntry{{}, refused}});
  std::ostringstream log;
  CommandContext ctx{CliConfig{}, &backend, &log};
  const int code = run_extract(ExtractArgs{fixture_dir() / "e2e" / "articles", data_dir() / "form57.schema.json",
                                           std::nullopt, BatchingMode::All, out.path()},
                               ctx);
  EXPECT_EQ(code, kExitPartial);
  EXPECT_TRUE(std::filesystem::exists(out / "A01.form.json"));
  EXPECT_FALSE(std::filesystem::exists(out / "A03.form.json"));
  const Json m = read_json_file(out / "manifest.extract.json");
  EXPECT_EQ(m["status"], "partial");
  ASSERT_EQ(m["warnings"].size(), 1u);
  EXPECT_NE(m["warnings"][0].get<std::string>().find("A03"), std::string::npos);
}

TEST(TranscribeCommandTest, WritesFinalArtifacts) {
  TempDir out;
  write_text_atomic(out / "form.png", "png");
  ScriptedBackend backend(testing::kie_tape(2, testing::form57_schema_json(), testing::form57_groups_json()));
  CliConfig config;
  config.kie.n_samples = 2;
  std::ostringstream log;
  const int code = run_transcribe(TranscribeArgs{out / "form.png", out.path()}, CommandContext{config, &backend, &log});
  ASSERT_EQ(code, kExitOk) << log.str();
  EXPECT_EQ(parse_schema(read_json_file(out / "T_final.json"), SchemaVariant::HumanCentric), testing::form57_schema());
  EXPECT_EQ(parse_grouping(read_json_file(out / "G_final.json"), testing::form57_schema()), testing::form57_grouping());
  const Json m = read_json_file(out / "manifest.transcribe.json");
  EXPECT_EQ(m["phases"].size(), 4u);
  EXPECT_EQ(m["phases"][0]["attempts"], Json({1, 1}));
}

TEST(TranscribeCommandTest, FailedGroupingStillWritesTranscription) {
  TempDir out;
  write_text_atomic(out / "form.png", "png");
  auto tape = testing::kie_tape(1, testing::form57_schema_json(), testing::form57_groups_json());
  tape.resize(2);
  ScriptedBackend backend(std::move(tape));
  CliConfig config;
  config.kie.n_samples = 1;
  std::ostringstream log;
  const int code = run_transcribe(TranscribeArgs{out / "form.png", out.path()}, CommandContext{config, &backend, &log});
  EXPECT_EQ(code, kExitFailure);
  EXPECT_TRUE(std::filesystem::exists(out / "T_final.json"));
  EXPECT_FALSE(std::filesystem::exists(out / "G_final.json"));
  EXPECT_EQ(read_json_file(out / "manifest.transcribe.json")["failed_phase"], "group");
}

TEST(TranscribeCommandTest, MissingImageFails) {
  TempDir out;
  CountingGateway gw;
  std::ostringstream log;
  EXPECT_EQ(run_transcribe(TranscribeArgs{out / "none.png", out.path()}, CommandContext{CliConfig{}, &gw, &log}),
            kExitFailure);
  EXPECT_EQ(gw.calls(), 0u);
}

TEST(EvaluateCommandTest, RepeatedRunsReportSpread) {
  TempDir out;
  testing::run_e2e(out.path());
  std::filesystem::create_directories(out / "forms2");
  for (const char* id : {"A01", "A03"}) {
    PopulatedForm form = form_from_json(read_json_file(out / "forms" / (std::string(id) + ".form.json")),
                                        testing::form57_schema());
    for (auto& a : form.answers) a.value = UnknownValue{};
    write_json_atomic(out / "forms2" / (std::string(id) + ".form.json"), form_to_json(form));
  }
  std::ostringstream log;
  const int code = run_evaluate(EvaluateArgs{{out / "forms", out / "forms2"},
                                             data_dir() / "form57.schema.json",
                                             out / "link" / "linkage.json",
                                             fixture_dir() / "e2e" / "fra.csv",
                                             fixture_dir() / "e2e" / "annotations",
                                             data_dir() / "fra_crosswalk.json",
                                             out / "eval2"},
                                CommandContext{CliConfig{}, nullptr, &log});
  ASSERT_EQ(code, kExitOk) << log.str();
  const Json doc = read_json_file(out / "eval2" / "report.json");
  EXPECT_EQ(doc["runs"]["count"], 2);
  const double c1 = doc["runs"]["per_run"][0]["coverage"];
  EXPECT_DOUBLE_EQ(doc["runs"]["per_run"][1]["coverage"].get<double>(), 0.0);
  EXPECT_NEAR(doc["runs"]["coverage_std"].get<double>(), c1 / 2.0, 1e-12);
  EXPECT_NE(read_text_file(out / "eval2" / "report.txt").find(" ± "), std::string::npos);
}

TEST(EvaluateCommandTest, MixedModesFail) {
  TempDir out;
  testing::run_e2e(out.path());
  PopulatedForm form = form_from_json(read_json_file(out / "forms" / "A03.form.json"), testing::form57_schema());
  form.batching_mode = BatchingMode::All;
  form.grouping_used.reset();
  write_json_atomic(out / "forms" / "A03.form.json", form_to_json(form));
  std::ostringstream log;
  const int code = run_evaluate(EvaluateArgs{{out / "forms"},
                                             data_dir() / "form57.schema.json",
                                             out / "link" / "linkage.json",
                                             fixture_dir() / "e2e" / "fra.csv",
                                             fixture_dir() / "e2e" / "annotations",
                                             data_dir() / "fra_crosswalk.json",
                                             out / "eval2"},
                                CommandContext{CliConfig{}, nullptr, &log});
  EXPECT_EQ(code, kExitFailure);
}

TEST(CliConfigTest, ParsesSections) {
  const Json doc = parse_json(R"({
    "kie": {"n_samples": 3, "variant": "naive", "sample_aggregation": false},
    "qa": {"max_parallel": 2},
    "retry": {"max_attempts": 5, "initial_backoff_ms": 10},
    "backend": {"endpoint": "http://localhost:9/v1", "models": {"qa": "small"}},
    "judge": "model",
    "kie_model": "big",
    "prompts": "p.json"
  })");
  const CliConfig c = CliConfig::from_json(doc, "/etc/form57");
  EXPECT_EQ(c.kie.n_samples, 3);
  EXPECT_EQ(c.kie.variant, SchemaVariant::Naive);
  EXPECT_FALSE(c.kie.sample_aggregation);
  EXPECT_EQ(c.qa_max_parallel, 2u);
  EXPECT_EQ(c.retry.max_attempts, 5);
  EXPECT_EQ(c.kie.transport_retry.initial_backoff, std::chrono::milliseconds(10));
  EXPECT_EQ(c.backend.models.at(ModelRole::Qa), "small");
  EXPECT_TRUE(c.model_judge);
  EXPECT_EQ(c.prompts_path, std::filesystem::path("/etc/form57/p.json"));
  EXPECT_EQ(c.snapshot()["kie_model"], "big");
  EXPECT_EQ(CliConfig::from_json(Json::object()).kie.n_samples, 5);
}

TEST(CliConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(CliConfig::from_json(parse_json(R"({"kie": {"samples": 3}})")), std::invalid_argument);
  EXPECT_THROW(CliConfig::from_json(parse_json(R"({"colour": 1})")), std::invalid_argument);
  EXPECT_THROW(CliConfig::from_json(parse_json(R"({"kie": {"n_samples": 0}})")), std::invalid_argument);
  EXPECT_THROW(CliConfig::from_json(parse_json(R"({"judge": "human"})")), std::invalid_argument);
  EXPECT_THROW(CliConfig::from_json(parse_json(R"({"retry": {"max_attempts": "3"}})")), std::invalid_argument);
}

TEST(MakeBackendTest, ScriptedAndErrors) {
  TempDir dir;
  write_json_atomic(dir / "tape.json", Json::array({{{"response", "hi"}}}));
  const auto backend = make_backend("scripted:" + (dir / "tape.json").string(), CliConfig{});
  EXPECT_EQ(backend->id(), "scripted:tape.json");
  EXPECT_THROW(make_backend("carrier-pigeon", CliConfig{}), std::invalid_argument);
}

TEST(RunIdTest, UniqueAndWellFormed) {
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) ids.insert(new_run_id());
  EXPECT_EQ(ids.size(), 50u);
}

TEST(PipelineLabelTest, Labels) {
  EXPECT_EQ(pipeline_label(BatchingMode::Single), "Single-field QA");
  EXPECT_EQ(pipeline_label(BatchingMode::All), "All-fields QA");
  EXPECT_EQ(pipeline_label(BatchingMode::Group), "Grouped QA");
}

}  // namespace
}  // namespace form57
