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

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "form57/commands.hpp"

namespace {

struct Common {
  std::string config;
  std::string backend = "live";
};

form57::CommandContext make_context(const Common& common, bool needs_backend,
                                    std::unique_ptr<form57::ModelGateway>& owner) {
  form57::CommandContext ctx;
  ctx.config = form57::CliConfig::load(common.config.empty() ? std::nullopt
                                                              : std::optional<std::filesystem::path>(common.config));
  if (needs_backend || ctx.config.model_judge) {
    owner = form57::make_backend(common.backend, ctx.config);
    ctx.gateway = owner.get();
  }
  ctx.log = &std::cerr;
  return ctx;
}

void add_common(CLI::App* cmd, Common& common, bool backend) {
  cmd->add_option("--config", common.config, "Pipeline config JSON")->check(CLI::ExistingFile);
  if (backend) cmd->add_option("--backend", common.backend, "live or scripted:<tape.json>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Populate FRA Form 57 from news articles"};
  app.require_subcommand(1);
  Common common;

  form57::TranscribeArgs transcribe;
  auto* t = app.add_subcommand("transcribe", "Transcribe the blank form into T_final.json and G_final.json");
  t->add_option("image", transcribe.image, "Blank form image")->required();
  t->add_option("--out", transcribe.out_dir, "Output directory")->required();
  add_common(t, common, true);

  form57::ExtractArgs extract;
  std::string mode = "group";
  std::string grouping;
  auto* e = app.add_subcommand("extract", "Populate one form per article");
  e->add_option("articles", extract.articles_dir, "Directory of {id}.txt + {id}.meta.json")->required();
  e->add_option("--schema", extract.schema, "Schema JSON (T_final)")->required()->check(CLI::ExistingFile);
  e->add_option("--grouping", grouping, "Grouping JSON (G_final)")->check(CLI::ExistingFile);
  e->add_option("--mode", mode, "single, all or group")->check(CLI::IsMember({"single", "all", "group"}));
  e->add_option("--out", extract.out_dir, "Output directory")->required();
  add_common(e, common, true);

  form57::LinkArgs link;
  std::string forms_dir;
  std::string crosswalk;
  auto* l = app.add_subcommand("link", "Link articles to FRA incident records");
  l->add_option("articles", link.articles_dir, "Article directory")->required();
  l->add_option("--fra", link.fra_csv, "FRA incident CSV")->required()->check(CLI::ExistingFile);
  l->add_option("--forms", forms_dir, "Extracted forms, used for linkage cues")->check(CLI::ExistingDirectory);
  l->add_option("--crosswalk", crosswalk, "Crosswalk JSON")->check(CLI::ExistingFile);
  l->add_option("--out", link.out_dir, "Output directory")->required();
  add_common(l, common, false);

  form57::EvaluateArgs evaluate;
  auto* v = app.add_subcommand("evaluate", "Score forms against linked FRA records");
  v->add_option("--forms", evaluate.forms_dirs, "Forms directory; repeat once per run")->required();
  v->add_option("--schema", evaluate.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--linkage", evaluate.linkage, "linkage.json")->required()->check(CLI::ExistingFile);
  v->add_option("--fra", evaluate.fra_csv, "FRA incident CSV")->required()->check(CLI::ExistingFile);
  v->add_option("--annotations", evaluate.annotations_dir, "Directory of {id}.answerable.json")->required();
  v->add_option("--crosswalk", evaluate.crosswalk, "Crosswalk JSON")->required()->check(CLI::ExistingFile);
  v->add_option("--out", evaluate.out_dir, "Output directory")->required();
  add_common(v, common, true);

  form57::ServeArgs serve;
  auto* s = app.add_subcommand("serve", "Serve the review API over a state directory");
  s->add_option("state", serve.state_dir, "State directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--host", serve.host, "Bind address");
  s->add_option("--port", serve.port, "Port");
  add_common(s, common, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : form57::kExitUsage;
  }

  std::unique_ptr<form57::ModelGateway> gateway;
  try {
    if (*t) return form57::run_transcribe(transcribe, make_context(common, true, gateway));
    if (*e) {
      extract.mode = *form57::batching_mode_from_string(mode);
      if (!grouping.empty()) extract.grouping = grouping;
      return form57::run_extract(extract, make_context(common, true, gateway));
    }
    if (*l) {
      if (!forms_dir.empty()) link.forms_dir = forms_dir;
      if (!crosswalk.empty()) link.crosswalk = crosswalk;
      return form57::run_link(link, make_context(common, false, gateway));
    }
    if (*v) return form57::run_evaluate(evaluate, make_context(common, false, gateway));
    if (*s) return form57::run_serve(serve, make_context(common, true, gateway));
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return form57::kExitFailure;
  }
  return form57::kExitUsage;
}
