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


// Prints one PASS/FAIL line per acceptance criterion; exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "defect_catalog.hpp"
#include "e2e_run.hpp"
#include "form57/evaluation.hpp"
#include "form57/kie.hpp"
#include "form57/linkage.hpp"
#include "form57/qa.hpp"
#include "form57/scripted_backend.hpp"
#include "form57/text.hpp"
#include "test_support.hpp"

namespace form57::acceptance {
namespace {

using namespace form57::testing;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failed check in `o`.
void check(Outcome& o, bool ok, const std::string& what) {
  if (!ok && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

FormDocument blank_form() { return FormDocument{"form57.png", ImagePart{"acceptance-form", "image/png"}}; }

KiePipelineConfig kie_config(int n) {
  KiePipelineConfig cfg;
  cfg.n_samples = n;
  cfg.transport_retry.initial_backoff = std::chrono::milliseconds(0);
  return cfg;
}

Outcome algorithm_structure() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  {
    ScriptedBackend backend(kie_tape(5, form57_schema_json(), form57_groups_json()));
    const KieResult r = KiePipeline(backend, kie_config(5)).run(blank_form());
    check(o, backend.call_count() == 12, "N=5 made " + std::to_string(backend.call_count()) + " calls, expected 12");
    check(o, validate_transcription_format(r.transcription.payload(), SchemaVariant::HumanCentric).ok(),
          "T_final does not validate");
    check(o, validate_groups_format(serialize_grouping(r.grouping.assignment), r.transcription.schema).ok(),
          "G_final does not validate");
  }
  {
    auto tape = kie_tape(5, form57_schema_json(), form57_groups_json());
    tape.insert(tape.begin(), tape_reply("kie.transcribe#", R"([{"name": "1. Broken"}])"));
    ScriptedBackend backend(std::move(tape));
    const KieResult r = KiePipeline(backend, kie_config(5)).run(blank_form());
    const auto& a = r.trace.phases.front().attempts;
    check(o, std::accumulate(a.begin(), a.end(), 0) == 6, "invalid sample did not add one attempt");
    check(o, backend.call_count() == 13, "invalid sample run made " + std::to_string(backend.call_count()) + " calls");
    check(o, validate_transcription_format(r.transcription.payload(), SchemaVariant::HumanCentric).ok(),
          "T_final after retry does not validate");
  }
  {
    KiePipelineConfig cfg = kie_config(1);
    cfg.max_validation_retries = 4;
    std::vector<TapeEntry> tape;
    for (int i = 0; i < 4; ++i) tape.push_back(tape_reply("kie.transcribe#", "not json"));
    ScriptedBackend backend(std::move(tape));
    bool exhausted = false;
    try {
      KiePipeline(backend, cfg).run(blank_form());
    } catch (const KieRunError& e) {
      try {
        std::rethrow_exception(e.cause());
      } catch (const ValidationRetriesExhausted& v) {
        exhausted = v.attempts() == 4;
      } catch (...) {
      }
    }
    check(o, exhausted, "budget of 4 invalid outputs did not raise ValidationRetriesExhausted");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check(o, secs < 1.0, "runtime " + std::to_string(secs) + " s");
  if (o.pass) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "12 calls at N=5, retry and exhaustion paths, %.3f s", secs);
    o.detail = buf;
  }
  return o;
}

Outcome schema_fidelity() {
  Outcome o;
  const std::string original = read_text_file(data_dir() / "form57.schema.json");
  const FormSchema parsed = parse_schema(parse_json(original), SchemaVariant::HumanCentric);
  check(o, parsed.field_count() == 66, "fixture has " + std::to_string(parsed.field_count()) + " fields");
  check(o, dump_canonical(serialize_schema(parsed, SchemaVariant::HumanCentric)) == original,
        "schema round trip is not byte-stable");
  const std::string groups = read_text_file(data_dir() / "form57.groups.json");
  check(o, dump_canonical(serialize_grouping(parse_grouping(parse_json(groups), parsed))) == groups,
        "grouping round trip is not byte-stable");
  const auto catalog = defect_catalog();
  std::size_t rejected = 0;
  for (const auto& d : catalog) {
    const bool r = d.rejected();
    rejected += r ? 1 : 0;
    check(o, r, "defect not rejected: " + d.name);
  }
  check(o, catalog.size() >= 10, "catalog too small");
  if (o.pass) o.detail = "round trip byte-stable; " + std::to_string(rejected) + "/" + std::to_string(catalog.size()) + " defects rejected";
  return o;
}

Outcome kie_error_counting() {
  Outcome o;
  const Transcription gold{form57_schema(), SchemaVariant::HumanCentric, {}, 1};
  std::vector<std::size_t> order(66);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937 rng(66);
  for (int k : {0, 1, 2, 5, 10}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::shuffle(order.begin(), order.end(), rng);
      const Transcription pred{with_altered_names(form57_schema(), order, k), SchemaVariant::HumanCentric, {}, 1};
      const int got = count_kie_errors(pred, gold).errors;
      check(o, got == k, "k=" + std::to_string(k) + " counted " + std::to_string(got));
    }
  }
  if (o.pass) o.detail = "k in {0,1,2,5,10} counted exactly";
  return o;
}

// Brute-force recount written against the verdict definitions only.
struct Recount {
  double accuracy = 0.0;
  double coverage = 0.0;
  bool accuracy_defined = false;
};

Outcome metric_oracle() {
  Outcome o;
  const Crosswalk crosswalk = Crosswalk::from_file(data_dir() / "fra_crosswalk.json");
  const auto records = load_fra_csv(fixture_dir() / "linkage" / "fra.csv").records;
  const auto keys = form57_schema().place_keys();
  OfflineTextJudge offline;
  std::mt19937 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const FraRecord& rec = records[rng() % records.size()];
    PopulatedForm form;
    form.article_id = "S" + std::to_string(trial);
    Json ann = Json::array();
    for (const auto& key : keys) {
      const AnswerPlace& place = *form57_schema().find(key);
      if (rng() % 2) ann.push_back(key.str());
      AnswerValue value = UnknownValue{};
      std::optional<std::string> gold;
      if (crosswalk.find(key)) gold = crosswalk.gold_value(key, rec.raw_fields);
      const bool use_gold = gold && rng() % 2;
      if (rng() % 4 != 0) {
        switch (place.answer_type) {
          case AnswerType::Text:
            value = TextValue{use_gold ? *gold : std::string("somewhere else")};
            break;
          case AnswerType::Digit:
            value = DigitValue{static_cast<double>(rng() % 100) / 4.0};
            break;
          case AnswerType::Choice:
            value = ChoiceValue{use_gold && place.choices.find_code(*gold) ? *gold
                                                                            : place.choices.entries()[rng() % place.choices.size()].code};
            break;
        }
      }
      form.answers.push_back({key, value, ""});
    }
    const AnswerabilityAnnotation annotation = annotation_from_json(form.article_id, ann, form57_schema());
    const EvalReport report = compute_report(form, &rec, annotation, form57_schema(), crosswalk, offline);

    std::size_t answerable = 0, attempted = 0, match = 0, mismatch = 0;
    for (const auto& a : form.answers) {
      if (!annotation.answerable.contains(a.key)) continue;
      ++answerable;
      if (a.is_unknown()) continue;
      ++attempted;
      std::optional<std::string> gold;
      if (crosswalk.find(a.key)) gold = crosswalk.gold_value(a.key, rec.raw_fields);
      if (!gold || gold->empty()) continue;
      const DigitSemantics sem = crosswalk.find(a.key)->semantics;
      bool ok = false;
      if (const auto* t = std::get_if<TextValue>(&a.value)) ok = token_overlap(*gold, t->text) >= 0.8;
      if (const auto* c = std::get_if<ChoiceValue>(&a.value)) ok = text::casefold(c->code) == text::casefold(*gold);
      if (const auto* d = std::get_if<DigitValue>(&a.value)) {
        if (sem == DigitSemantics::Time) {
          const auto colon = gold->find(':');
          if (colon == std::string::npos) continue;
          const long long g = std::stoll(gold->substr(0, colon)) * 60 + std::stoll(gold->substr(colon + 1));
          ok = std::llabs(std::llround(d->value * 60) - g) <= 60;
        } else {
          char* end = nullptr;
          const double g = std::strtod(gold->c_str(), &end);
          if (end == gold->c_str()) continue;
          ok = std::abs(d->value - g) <= (sem == DigitSemantics::Speed ? 10.0 + 1e-9 : 1e-9);
        }
      }
      (ok ? match : mismatch) += 1;
    }
    Recount r;
    r.accuracy_defined = match + mismatch > 0;
    r.accuracy = r.accuracy_defined ? static_cast<double>(match) / static_cast<double>(match + mismatch) : 0.0;
    r.coverage = answerable ? static_cast<double>(attempted) / static_cast<double>(answerable) : 0.0;
    const std::string tag = "triple " + std::to_string(trial) + ": ";
    check(o, report.accuracy_defined == r.accuracy_defined, tag + "accuracy definedness differs");
    check(o, std::abs(report.accuracy - r.accuracy) <= 1e-9,
          tag + "accuracy " + std::to_string(report.accuracy) + " vs " + std::to_string(r.accuracy));
    check(o, std::abs(report.coverage - r.coverage) <= 1e-9,
          tag + "coverage " + std::to_string(report.coverage) + " vs " + std::to_string(r.coverage));
  }

  auto verdict = [](Verdict v) {
    JudgeVerdict j;
    j.key = {"9", "County name"};
    j.verdict = v;
    j.answerable = true;
    j.has_ground_truth = true;
    return j;
  };
  std::vector<JudgeVerdict> nine(9, verdict(Verdict::Match));
  nine.push_back(verdict(Verdict::NotAttempted));
  check(o, std::abs(summarize_verdicts(nine).coverage - 0.9) <= 1e-9, "9/10 attempted is not coverage 0.9");
  const EvalReport none = summarize_verdicts(std::vector<JudgeVerdict>(10, verdict(Verdict::NotAttempted)));
  check(o, none.coverage == 0.0 && none.coverage_defined && !none.accuracy_defined,
        "all-Unknown is not coverage 0 with undefined accuracy");
  if (o.pass) o.detail = "50 random triples within 1e-9; 9/10 -> 0.9; all-Unknown -> 0, accuracy undefined";
  return o;
}

Verdict judge_digit(const std::string& key, double pred, double gold, DigitSemantics sem) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", gold);
  const FieldAnswer answer{*PlaceKey::parse(key), DigitValue{pred}, ""};
  return judge_field(answer, GoldValue{buf, sem}, *form57_schema().find(answer.key), nullptr).verdict;
}

Outcome judging_rules() {
  Outcome o;
  check(o, judge_digit("6/Time", 3.5, 2.5, DigitSemantics::Time) == Verdict::Match, "time delta 60 is not a match");
  check(o, judge_digit("6/Time", 2.5 + 61.0 / 60.0, 2.5, DigitSemantics::Time) == Verdict::Mismatch,
        "time delta 61 is not a mismatch");
  check(o, judge_digit("14/Speed (MPH)", 35, 25, DigitSemantics::Speed) == Verdict::Match, "speed delta 10 is not a match");
  check(o, judge_digit("14/Speed (MPH)", 36, 25, DigitSemantics::Speed) == Verdict::Mismatch,
        "speed delta 11 is not a mismatch");

  std::mt19937 rng(53);
  std::uniform_int_distribution<int> minute(0, 24 * 60 - 1);
  std::uniform_int_distribution<int> mph(0, 120);
  std::uniform_int_distribution<int> count(0, 5);
  for (int i = 0; i < 2000; ++i) {
    const double ta = minute(rng) / 60.0, tb = minute(rng) / 60.0;
    check(o, judge_digit("6/Time", ta, tb, DigitSemantics::Time) == judge_digit("6/Time", tb, ta, DigitSemantics::Time),
          "time judging is not symmetric");
    const double sa = mph(rng) + (rng() % 4) / 4.0, sb = mph(rng);
    check(o, judge_digit("14/Speed (MPH)", sa, sb, DigitSemantics::Speed) ==
                 judge_digit("14/Speed (MPH)", sb, sa, DigitSemantics::Speed),
          "speed judging is not symmetric");
    const double ka = count(rng), kb = count(rng);
    check(o, judge_digit("46/Killed", ka, kb, DigitSemantics::Number) == judge_digit("46/Killed", kb, ka, DigitSemantics::Number),
          "count judging is not symmetric");
  }
  OfflineTextJudge offline;
  for (const auto& key : form57_schema().place_keys()) {
    const FieldAnswer unknown{key, UnknownValue{}, ""};
    for (const std::optional<GoldValue>& gold : {std::optional<GoldValue>{}, std::optional<GoldValue>{GoldValue{"1"}}}) {
      check(o, judge_field(unknown, gold, *form57_schema().find(key), &offline).verdict == Verdict::NotAttempted,
            "Unknown on " + key.str() + " is not NotAttempted");
    }
  }
  if (o.pass) o.detail = "time 60/61, speed 10/11 boundaries; 6000 symmetric pairs; Unknown -> NotAttempted";
  return o;
}

Outcome linkage_oracle() {
  Outcome o;
  const auto dir = fixture_dir() / "linkage";
  const Json expected = read_json_file(dir / "expected.json");
  const auto records = load_fra_csv(dir / "fra.csv").records;
  std::vector<LinkageInput> inputs;
  for (const auto& id : list_article_ids(dir / "articles")) {
    LinkageInput in{load_article(dir / "articles", id), {}};
    if (expected["extracted_cues"].contains(id)) {
      in.extracted = article_from_json(id, "-", Json{{"published_at", "2000-01-01"}, {"cues", expected["extracted_cues"][id]}}).cues;
    }
    inputs.push_back(std::move(in));
  }
  check(o, records.size() == 20 && inputs.size() == 10, "fixture is not 20 rows and 10 articles");
  check(o, build_linkage_report(inputs, records) == linkage_from_json(expected["report"]),
        "report differs from the hand-built mapping");

  std::mt19937 rng(1000);
  std::uniform_int_distribution<int> shift(-15, 15);
  std::size_t matched = 0;
  for (int i = 0; i < 1000; ++i) {
    LinkageInput in = inputs[static_cast<std::size_t>(i) % inputs.size()];
    const auto day = std::chrono::sys_days{in.article.published_date} + std::chrono::days{shift(rng)};
    in.article.published_date = Date{day};
    for (const auto& c : match_article(in.article, in.extracted, records)) {
      if (c.decision != MatchDecision::Matched) continue;
      ++matched;
      const auto rec = std::find_if(records.begin(), records.end(), [&](const FraRecord& r) { return r.record_id == c.record_id; });
      const long long offset = (day - std::chrono::sys_days{rec->incident_date}).count();
      check(o, offset >= 0 && offset <= 7 && offset == c.day_offset,
            in.article.article_id + " matched " + c.record_id + " at offset " + std::to_string(offset));
    }
  }
  if (o.pass) o.detail = "exact report match; 1000 fuzzed dates, " + std::to_string(matched) + " matches all within [0,7]";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  TempDir out;
  const E2eRun run = run_e2e(out.path());
  check(o, run.extract_exit == 0 && run.link_exit == 0 && run.evaluate_exit == 0, "a pipeline step failed:\n" + run.log);
  check(o, run.qa_calls == 12 && run.tape_left == 0, "group mode made " + std::to_string(run.qa_calls) + " calls, expected 12");
  for (const auto& name : golden_artifacts()) {
    check(o, read_text_file(out / name) == read_text_file(golden_dir() / name), name + " differs from golden");
  }
  const std::string table = read_text_file(out / "eval" / "report.txt");
  check(o, table.find("Pipeline") != std::string::npos && table.find("Accuracy") != std::string::npos &&
               table.find("Coverage") != std::string::npos,
        "evaluation text lacks the QA table columns");

  const ArticleDoc article = load_article(fixture_dir() / "e2e" / "articles", "A01");
  const std::pair<BatchingMode, std::size_t> modes[] = {
      {BatchingMode::Single, 66}, {BatchingMode::All, 1}, {BatchingMode::Group, form57_grouping().groups().size()}};
  for (const auto& [mode, expected] : modes) {
    CountingGateway gw;
    populate_form(form57_schema(), &form57_grouping(), article, mode, gw);
    check(o, gw.calls() == expected,
          std::string(to_string(mode)) + " mode made " + std::to_string(gw.calls()) + " calls per article");
  }
  if (o.pass) o.detail = std::to_string(golden_artifacts().size()) + " artifacts byte-identical; calls 66/1/6 per article";
  return o;
}

}  // namespace
}  // namespace form57::acceptance

int main() {
  using namespace form57::acceptance;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"algorithm-structure", algorithm_structure}, {"schema-fidelity", schema_fidelity},
      {"kie-error-counting", kie_error_counting},   {"metric-oracle", metric_oracle},
      {"judging-rules", judging_rules},             {"linkage-oracle", linkage_oracle},
      {"end-to-end-golden", end_to_end},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " - " << o.detail << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
