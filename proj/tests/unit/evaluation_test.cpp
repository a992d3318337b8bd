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

#include <cmath>
#include <random>

#include "form57/evaluation.hpp"
#include "form57/report_table.hpp"
#include "form57/scripted_backend.hpp"
#include "test_support.hpp"

namespace form57 {
namespace {

using testing::data_dir;
using testing::fixture_dir;
using testing::form57_schema;

const Crosswalk& crosswalk() {
  static const Crosswalk cw = Crosswalk::from_file(data_dir() / "fra_crosswalk.json");
  return cw;
}

const FraRecord& r001() {
  static const FraRecord r = load_fra_csv(fixture_dir() / "linkage" / "fra.csv").records.front();
  return r;
}

const AnswerPlace& place_of(const std::string& key) { return *form57_schema().find(*PlaceKey::parse(key)); }

FieldAnswer digit(const std::string& key, double v) { return {*PlaceKey::parse(key), DigitValue{v}, ""}; }
FieldAnswer text(const std::string& key, std::string v) { return {*PlaceKey::parse(key), TextValue{std::move(v)}, ""}; }
FieldAnswer choice(const std::string& key, std::string v) { return {*PlaceKey::parse(key), ChoiceValue{std::move(v)}, ""}; }
FieldAnswer unknown(const std::string& key) { return {*PlaceKey::parse(key), UnknownValue{}, ""}; }

Verdict judge(const FieldAnswer& pred, std::string gold, DigitSemantics s = DigitSemantics::Number) {
  OfflineTextJudge offline;
  return judge_field(pred, GoldValue{std::move(gold), s}, place_of(pred.key.str()), &offline).verdict;
}

TEST(JudgeFieldTest, TimeToleranceIsSixtyMinutes) {
  EXPECT_EQ(judge(digit("6/Time", 2.5), "3:30", DigitSemantics::Time), Verdict::Match);
  EXPECT_EQ(judge(digit("6/Time", 2.5 - 61.0 / 60.0), "2:30", DigitSemantics::Time), Verdict::Mismatch);
  EXPECT_EQ(judge(digit("6/Time", 2.5 + 60.0 / 60.0), "2:30", DigitSemantics::Time), Verdict::Match);
  EXPECT_EQ(judge(digit("6/Time", 14.5), "15:10", DigitSemantics::Time), Verdict::Match);
  EXPECT_EQ(judge(digit("6/Time", 14.5), "15:31", DigitSemantics::Time), Verdict::Mismatch);
}

TEST(JudgeFieldTest, TimeBoundaryIsSymmetric) {
  for (int delta = -90; delta <= 90; ++delta) {
    const double pred = (600 + delta) / 60.0;
    const Verdict expected = std::abs(delta) <= 60 ? Verdict::Match : Verdict::Mismatch;
    EXPECT_EQ(judge(digit("6/Time", pred), "10:00", DigitSemantics::Time), expected) << delta;
  }
}

TEST(JudgeFieldTest, SpeedToleranceIsTenMph) {
  EXPECT_EQ(judge(digit("14/Speed (MPH)", 35), "25", DigitSemantics::Speed), Verdict::Match);
  EXPECT_EQ(judge(digit("14/Speed (MPH)", 15), "25", DigitSemantics::Speed), Verdict::Match);
  EXPECT_EQ(judge(digit("14/Speed (MPH)", 36), "25", DigitSemantics::Speed), Verdict::Mismatch);
  EXPECT_EQ(judge(digit("14/Speed (MPH)", 14), "25", DigitSemantics::Speed), Verdict::Mismatch);
  EXPECT_EQ(judge(digit("14/Speed (MPH)", 35.3), "25.3", DigitSemantics::Speed), Verdict::Match);
}

TEST(JudgeFieldTest, OtherDigitsAreExact) {
  EXPECT_EQ(judge(digit("46/Killed", 1), "1"), Verdict::Match);
  EXPECT_EQ(judge(digit("46/Killed", 2), "1"), Verdict::Mismatch);
  EXPECT_EQ(judge(digit("38/Age", 34.0000000001), "34"), Verdict::Match);
}

TEST(JudgeFieldTest, ChoiceComparesCodes) {
  EXPECT_EQ(judge(choice("13/Highway user", "A"), "a"), Verdict::Match);
  EXPECT_EQ(judge(choice("13/Highway user", "B"), "A"), Verdict::Mismatch);
}

TEST(JudgeFieldTest, UnknownIsNotAttemptedEvenWithGold) {
  OfflineTextJudge offline;
  const auto v = judge_field(unknown("9/County name"), GoldValue{"Harris"}, place_of("9/County name"), &offline);
  EXPECT_EQ(v.verdict, Verdict::NotAttempted);
  EXPECT_TRUE(v.has_ground_truth);
  EXPECT_EQ(v.rule, JudgeRule::UnknownSkip);
}

TEST(JudgeFieldTest, MissingGoldIsNoGroundTruth) {
  OfflineTextJudge offline;
  EXPECT_EQ(judge_field(text("9/County name", "Harris"), std::nullopt, place_of("9/County name"), &offline).verdict,
            Verdict::NoGroundTruth);
  EXPECT_EQ(judge(text("9/County name", "Harris"), "  "), Verdict::NoGroundTruth);
  EXPECT_EQ(judge(digit("46/Killed", 1), "n/a"), Verdict::NoGroundTruth);
}

TEST(JudgeFieldTest, FreeTextNeedsAJudge) {
  EXPECT_THROW(judge_field(text("9/County name", "Harris"), GoldValue{"Harris"}, place_of("9/County name"), nullptr),
               std::invalid_argument);
}

TEST(OfflineJudgeTest, TokenOverlap) {
  EXPECT_DOUBLE_EQ(token_overlap("Main St", "main st"), 1.0);
  EXPECT_DOUBLE_EQ(token_overlap("Main St", "Main"), 0.5);
  EXPECT_DOUBLE_EQ(token_overlap("", "x"), 0.0);
  EXPECT_DOUBLE_EQ(token_overlap("a b c d e", "a b c d"), 0.8);
  EXPECT_DOUBLE_EQ(token_overlap("a b c d", "a b c d e"), 0.8);
  OfflineTextJudge j;
  EXPECT_TRUE(j.equivalent("County", "Harris County", "harris county"));
  EXPECT_TRUE(j.equivalent("x", "a b c d e", "a b c d"));
  EXPECT_FALSE(j.equivalent("x", "a b c", "a b"));
}

TEST(ModelJudgeTest, ReadsYesNo) {
  TapeEntry yes{{}, std::string("Yes, they refer to the same street.")};
  yes.match.role = ModelRole::Judge;
  yes.match.contains = "Main St";
  TapeEntry no{{}, std::string("No.")};
  ScriptedBackend backend({yes, no});
  ModelTextJudge j(backend);
  EXPECT_TRUE(j.equivalent("12. Highway Name or No.", "Main St", "Main Street"));
  EXPECT_FALSE(j.equivalent("9. County", "Harris", "Travis"));
  ASSERT_EQ(backend.call_count(), 2u);
  EXPECT_EQ(backend.requests()[0].label, "eval.judge");
  EXPECT_EQ(backend.requests()[0].role, ModelRole::Judge);
  EXPECT_EQ(j.id(), "model:scripted");
}

TEST(CrosswalkTest, GoldValuesFromRecord) {
  const auto& raw = r001().raw_fields;
  EXPECT_EQ(crosswalk().gold_value({"6", "Time"}, raw), "2:30");
  EXPECT_EQ(crosswalk().gold_value({"6", "AM/PM"}, raw), "PM");
  EXPECT_EQ(crosswalk().gold_value({"5", "Month"}, raw), "03");
  EXPECT_EQ(crosswalk().gold_value({"13", "Highway user"}, raw), "A");
  EXPECT_EQ(crosswalk().gold_value({"12", "Public/Private"}, raw), "1");
  EXPECT_EQ(crosswalk().find({"14", "Speed (MPH)"})->semantics, DigitSemantics::Speed);
  EXPECT_THROW(crosswalk().gold_value({"7", "Station"}, raw), CrosswalkMissing);
  EXPECT_NO_THROW(crosswalk().check_against(form57_schema()));
}

TEST(CrosswalkTest, BlankAndUntranslatableCellsHaveNoGold) {
  std::map<std::string, std::string> raw{{"user_type", "Spaceship"}, {"county", ""}};
  EXPECT_FALSE(crosswalk().gold_value({"13", "Highway user"}, raw).has_value());
  EXPECT_FALSE(crosswalk().gold_value({"9", "County name"}, raw).has_value());
  EXPECT_FALSE(crosswalk().gold_value({"11", "City name"}, raw).has_value());
}

TEST(CrosswalkTest, RejectsMalformedDocuments) {
  EXPECT_THROW(Crosswalk::from_json(Json::array()), SchemaFormatError);
  EXPECT_THROW(Crosswalk::from_json({{"fields", {{"9/County name", {{"col", "county"}}}}}}), SchemaFormatError);
  EXPECT_THROW(Crosswalk::from_json({{"fields", {{"9", {{"column", "county"}}}}}}), SchemaFormatError);
  EXPECT_THROW(Crosswalk::from_json({{"fields", {{"6/Time", {{"column", "time"}, {"pattern", "(\\d+):(\\d+)"}}}}}}),
               SchemaFormatError);
  EXPECT_THROW(Crosswalk::from_json({{"fields", {{"6/Time", {{"column", "time"}, {"semantics", "date"}}}}}}),
               SchemaFormatError);
  EXPECT_THROW(Crosswalk::from_json({{"fields", Json::object()}, {"cues", {{"weather", "23/Weather"}}}}),
               SchemaFormatError);
  const Crosswalk stray = Crosswalk::from_json({{"fields", {{"99/None", {{"column", "x"}}}}}});
  EXPECT_THROW(stray.check_against(form57_schema()), SchemaFormatError);
}

TEST(AnnotationTest, ParsesAndValidates) {
  const auto ann = annotation_from_json("A1", Json{"9/County name", "6/AM/PM"}, form57_schema());
  EXPECT_EQ(ann.answerable.size(), 2u);
  EXPECT_TRUE(ann.answerable.contains(PlaceKey{"6", "AM/PM"}));
  EXPECT_EQ(annotation_from_json("A1", annotation_to_json(ann), form57_schema()).answerable, ann.answerable);
  EXPECT_THROW(annotation_from_json("A1", Json{"99/x"}, form57_schema()), SchemaFormatError);
  EXPECT_THROW(annotation_from_json("A1", Json{"9/County name", "9/County name"}, form57_schema()), SchemaFormatError);
  EXPECT_THROW(annotation_from_json("A1", Json::object(), form57_schema()), SchemaFormatError);
}

JudgeVerdict verdict(Verdict v, bool answerable = true, bool gold = true, AnswerType t = AnswerType::Text,
                     std::string field = "9") {
  JudgeVerdict j;
  j.key = {std::move(field), "p"};
  j.verdict = v;
  j.answerable = answerable;
  j.has_ground_truth = gold;
  j.answer_type = t;
  return j;
}

TEST(SummarizeTest, NineOfTenAttempted) {
  std::vector<JudgeVerdict> vs;
  for (int i = 0; i < 8; ++i) vs.push_back(verdict(Verdict::Match));
  vs.push_back(verdict(Verdict::Mismatch));
  vs.push_back(verdict(Verdict::NotAttempted));
  vs.push_back(verdict(Verdict::Match, false));
  vs.push_back(verdict(Verdict::NotAttempted, false));
  const EvalReport r = summarize_verdicts(vs);
  EXPECT_EQ(r.n_answerable, 10u);
  EXPECT_EQ(r.n_attempted, 9u);
  EXPECT_DOUBLE_EQ(r.coverage, 0.9);
  EXPECT_DOUBLE_EQ(r.accuracy, 8.0 / 9.0);
  EXPECT_DOUBLE_EQ(r.strict_accuracy, 0.8);
  EXPECT_EQ(r.verdicts.size(), 12u);
}

TEST(SummarizeTest, AllUnknownHasZeroCoverageAndUndefinedAccuracy) {
  std::vector<JudgeVerdict> vs(5, verdict(Verdict::NotAttempted));
  const EvalReport r = summarize_verdicts(vs);
  EXPECT_EQ(r.coverage, 0.0);
  EXPECT_TRUE(r.coverage_defined);
  EXPECT_FALSE(r.accuracy_defined);
  EXPECT_TRUE(r.strict_accuracy_defined);
  EXPECT_EQ(r.strict_accuracy, 0.0);
}

TEST(SummarizeTest, NothingAnswerableIsUndefined) {
  const EvalReport r = summarize_verdicts({verdict(Verdict::Match, false)});
  EXPECT_FALSE(r.coverage_defined);
  EXPECT_FALSE(r.accuracy_defined);
}

TEST(SummarizeTest, NoGroundTruthCountsAsAttemptedButNotJudged) {
  const EvalReport r = summarize_verdicts({verdict(Verdict::Match), verdict(Verdict::NoGroundTruth, true, false)});
  EXPECT_EQ(r.n_attempted, 2u);
  EXPECT_DOUBLE_EQ(r.coverage, 1.0);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(SummarizeTest, MatchesIndependentFormulaOnRandomCounts) {
  std::mt19937 rng(99);
  std::uniform_int_distribution<int> count(0, 30);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = count(rng), mm = count(rng), na = count(rng), ngt = count(rng), off = count(rng);
    std::vector<JudgeVerdict> vs;
    for (int i = 0; i < m; ++i) vs.push_back(verdict(Verdict::Match));
    for (int i = 0; i < mm; ++i) vs.push_back(verdict(Verdict::Mismatch));
    for (int i = 0; i < na; ++i) vs.push_back(verdict(Verdict::NotAttempted, true, i % 2 == 0));
    for (int i = 0; i < ngt; ++i) vs.push_back(verdict(Verdict::NoGroundTruth, true, false));
    for (int i = 0; i < off; ++i) vs.push_back(verdict(i % 2 ? Verdict::Match : Verdict::NotAttempted, false));
    std::shuffle(vs.begin(), vs.end(), rng);
    const EvalReport r = summarize_verdicts(vs);
    const int answerable = m + mm + na + ngt;
    ASSERT_EQ(r.accuracy_defined, m + mm > 0);
    if (m + mm > 0) {
      EXPECT_NEAR(r.accuracy, static_cast<double>(m) / (m + mm), 1e-12);
    }
    if (answerable > 0) {
      EXPECT_NEAR(r.coverage, static_cast<double>(m + mm + ngt) / answerable, 1e-12);
    }
    const int missed = (na + 1) / 2;
    if (m + mm + missed > 0) {
      EXPECT_NEAR(r.strict_accuracy, static_cast<double>(m) / (m + mm + missed), 1e-12);
    }
    EXPECT_LE(r.n_attempted, r.n_answerable);
    EXPECT_GE(r.coverage, 0.0);
    EXPECT_LE(r.coverage, 1.0);
  }
}

TEST(AggregateTest, PoolsVerdictsMicroAverage) {
  std::vector<JudgeVerdict> a, b;
  for (int i = 0; i < 9; ++i) a.push_back(verdict(Verdict::Match));
  a.push_back(verdict(Verdict::Mismatch));
  for (int i = 0; i < 10; ++i) b.push_back(verdict(Verdict::Match));
  const std::vector<EvalReport> reports{summarize_verdicts(a), summarize_verdicts(b)};
  const EvalReport pooled = aggregate_reports(reports);
  EXPECT_DOUBLE_EQ(pooled.accuracy, 0.95);
  EXPECT_EQ(pooled.n_answerable, 20u);

  std::vector<JudgeVerdict> c{verdict(Verdict::Mismatch), verdict(Verdict::Match), verdict(Verdict::Match),
                              verdict(Verdict::Match)};
  const std::vector<EvalReport> uneven{summarize_verdicts(a), summarize_verdicts(c)};
  EXPECT_DOUBLE_EQ(aggregate_reports(uneven).accuracy, 12.0 / 14.0);
}

TEST(RunSummaryTest, PopulationStandardDeviation) {
  std::vector<EvalReport> runs(3);
  runs[0].accuracy = 0.8;
  runs[1].accuracy = 0.9;
  runs[2].accuracy = 1.0;
  for (auto& r : runs) r.coverage = 0.5;
  const RunSummary s = summarize_runs(runs);
  EXPECT_NEAR(s.accuracy_mean, 0.9, 1e-12);
  EXPECT_NEAR(s.accuracy_std, std::sqrt(0.02 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(s.coverage_std, 0.0);
  EXPECT_EQ(s.runs, 3u);
}

PopulatedForm all_unknown_form() {
  PopulatedForm form;
  form.article_id = "A01";
  for (const auto& key : form57_schema().place_keys()) form.answers.push_back({key, UnknownValue{}, ""});
  return form;
}

TEST(ComputeReportTest, AgainstLinkedRecord) {
  PopulatedForm form = all_unknown_form();
  form.replace({digit("6/Time", 2.75), choice("6/AM/PM", "PM"), text("9/County name", "Harris"),
                text("11/City name", "Austin"), digit("14/Speed (MPH)", 40), digit("46/Killed", 1),
                choice("13/Highway user", "A"), text("7/Station", "Houston Yard")});
  const auto ann = annotation_from_json(
      "A01", Json{"6/Time", "6/AM/PM", "9/County name", "11/City name", "14/Speed (MPH)", "46/Killed", "46/Injured", "7/Station"},
      form57_schema());
  OfflineTextJudge offline;
  const EvalReport r = compute_report(form, &r001(), ann, form57_schema(), crosswalk(), offline);
  EXPECT_EQ(r.n_answerable, 8u);
  EXPECT_EQ(r.n_attempted, 7u);
  EXPECT_EQ(r.n_match, 4u);     // time, am/pm, county, killed
  EXPECT_EQ(r.n_mismatch, 2u);  // city, speed 40 vs 25
  EXPECT_EQ(r.n_missed_with_gold, 1u);
  EXPECT_DOUBLE_EQ(r.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(r.coverage, 7.0 / 8.0);
  EXPECT_EQ(r.verdicts.size(), 79u);
  EXPECT_EQ(r.by_answer_type.at(AnswerType::Digit).match, 2u);
  EXPECT_EQ(r.by_field.at("11").mismatch, 1u);
}

TEST(ComputeReportTest, UnlinkedArticleHasNoJudgedAnswers) {
  PopulatedForm form = all_unknown_form();
  form.replace({text("9/County name", "Harris")});
  const auto ann = annotation_from_json("A01", Json{"9/County name", "11/City name"}, form57_schema());
  OfflineTextJudge offline;
  const EvalReport r = compute_report(form, nullptr, ann, form57_schema(), crosswalk(), offline);
  EXPECT_EQ(r.n_match + r.n_mismatch, 0u);
  EXPECT_DOUBLE_EQ(r.coverage, 0.5);
  EXPECT_FALSE(r.accuracy_defined);
}

TEST(ComputeReportTest, BruteForceRecount) {
  std::mt19937 rng(5);
  const auto keys = form57_schema().place_keys();
  OfflineTextJudge offline;
  for (int trial = 0; trial < 20; ++trial) {
    PopulatedForm form = all_unknown_form();
    Json ann_doc = Json::array();
    for (const auto& key : keys) {
      if (rng() % 3 == 0) ann_doc.push_back(key.str());
      const AnswerPlace& place = *form57_schema().find(key);
      if (rng() % 2 == 0) continue;
      switch (place.answer_type) {
        case AnswerType::Text: form.replace({text(key.str(), rng() % 2 ? "Harris" : "Houston")}); break;
        case AnswerType::Digit: form.replace({digit(key.str(), static_cast<double>(rng() % 40))}); break;
        case AnswerType::Choice: form.replace({choice(key.str(), place.choices.entries()[rng() % place.choices.size()].code)}); break;
      }
    }
    const auto ann = annotation_from_json("A01", ann_doc, form57_schema());
    EvalOptions opts;
    opts.max_parallel = 1 + trial % 4;
    const EvalReport r = compute_report(form, &r001(), ann, form57_schema(), crosswalk(), offline, opts);

    std::size_t answerable = 0, attempted = 0, match = 0, mismatch = 0;
    for (const auto& key : keys) {
      if (!ann.answerable.contains(key)) continue;
      ++answerable;
      const FieldAnswer& a = *form.find(key);
      if (a.is_unknown()) continue;
      ++attempted;
      std::optional<GoldValue> gold;
      if (auto g = crosswalk().find(key) ? crosswalk().gold_value(key, r001().raw_fields) : std::nullopt) {
        gold = GoldValue{*g, crosswalk().find(key)->semantics};
      }
      const Verdict v = judge_field(a, gold, *form57_schema().find(key), &offline).verdict;
      match += v == Verdict::Match;
      mismatch += v == Verdict::Mismatch;
    }
    EXPECT_EQ(r.n_answerable, answerable);
    EXPECT_EQ(r.n_attempted, attempted);
    EXPECT_EQ(r.n_match, match);
    EXPECT_EQ(r.n_mismatch, mismatch);
  }
}

TEST(ReportJsonTest, CarriesCountsAndLabels) {
  const EvalReport r = summarize_verdicts({verdict(Verdict::Match, true, true, AnswerType::Choice),
                                           verdict(Verdict::Mismatch, true, true, AnswerType::Digit)});
  const Json doc = report_to_json(r);
  EXPECT_EQ(doc["n_match"], 1);
  EXPECT_EQ(doc["accuracy"], 0.5);
  EXPECT_TRUE(doc["by_answer_type"].contains("Single choice"));
  EXPECT_TRUE(doc["by_answer_type"].contains("Digit"));
}

TEST(ReportTableTest, QaTableLayout) {
  RunSummary one{1, 0.875, 0.0, 0.9, 0.0};
  RunSummary three{3, 0.9, 0.05, 0.8, 0.1};
  const std::vector<QaTableRow> rows{{"Grouped QA", "m1", "group", one}, {"Single-field QA", "m1", "single", three}};
  const std::string table = render_qa_table(rows);
  EXPECT_NE(table.find("Pipeline        | KIE model | QA batch | Accuracy"), std::string::npos) << table;
  EXPECT_NE(table.find("0.88"), std::string::npos);
  EXPECT_NE(table.find("0.90 ± 0.05"), std::string::npos);
  EXPECT_NE(table.find("population standard deviation"), std::string::npos);
  EXPECT_EQ(format_ratio(0.125), "0.12");
}

TEST(ReportTableTest, AnswerTypeAndWorstFields) {
  const EvalReport r = summarize_verdicts({verdict(Verdict::Match, true, true, AnswerType::Choice, "13"),
                                           verdict(Verdict::Mismatch, true, true, AnswerType::Text, "9"),
                                           verdict(Verdict::Match, true, true, AnswerType::Text, "11")});
  const std::string types = render_answer_type_table(r);
  EXPECT_NE(types.find("Single choice | 1.00"), std::string::npos) << types;
  EXPECT_NE(types.find("Digit         | n/a"), std::string::npos) << types;
  const std::string worst = render_worst_fields(r, form57_schema(), 2);
  EXPECT_NE(worst.find("9. County"), std::string::npos) << worst;
  EXPECT_EQ(worst.find("13."), std::string::npos) << worst;
}

}  // namespace
}  // namespace form57
