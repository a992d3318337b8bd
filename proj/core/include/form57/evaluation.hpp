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

#ifndef FORM57_EVALUATION_HPP_
#define FORM57_EVALUATION_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "form57/article.hpp"
#include "form57/gateway.hpp"
#include "form57/json_io.hpp"
#include "form57/linkage.hpp"
#include "form57/prompts.hpp"
#include "form57/qa.hpp"
#include "form57/schema.hpp"

namespace form57 {

// How a digit place is compared: minutes of day, miles per hour, or exactly.
enum class DigitSemantics { Number, Time, Speed };

inline constexpr int kTimeToleranceMinutes = 60;
inline constexpr double kSpeedToleranceMph = 10.0;
inline constexpr double kOfflineOverlapThreshold = 0.8;

class CrosswalkMissing : public std::runtime_error {
 public:
  explicit CrosswalkMissing(const std::string& key)
      : std::runtime_error("no crosswalk entry for " + key), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

struct CrosswalkEntry {
  std::string column;
  std::optional<std::string> pattern;       // one capture group picks the value
  std::map<std::string, std::string> values;  // CSV value -> choice code
  DigitSemantics semantics = DigitSemantics::Number;
};

// Maps answer places ("field_id/place") to FRA CSV columns.
class Crosswalk {
 public:
  static Crosswalk from_json(const Json& doc);
  static Crosswalk from_file(const std::filesystem::path& path);

  const std::string& version() const noexcept { return version_; }
  const CrosswalkEntry* find(const PlaceKey& key) const;
  // Throws CrosswalkMissing for an unmapped key. nullopt when the row has no
  // usable value (blank cell, pattern miss, untranslatable value).
  std::optional<std::string> gold_value(const PlaceKey& key, const std::map<std::string, std::string>& raw) const;
  const std::map<std::string, PlaceKey>& cues() const noexcept { return cues_; }
  // Every entry must name a place of the schema with a compatible type.
  void check_against(const FormSchema& schema) const;

 private:
  std::string version_;
  std::map<PlaceKey, CrosswalkEntry> entries_;
  std::map<PlaceKey, std::regex> patterns_;
  std::map<std::string, PlaceKey> cues_;
};

// Linkage cues read off a populated form through the crosswalk's cue map.
LinkageCues cues_from_form(const PopulatedForm& form, const Crosswalk& crosswalk);

struct AnswerabilityAnnotation {
  std::string article_id;
  std::set<PlaceKey> answerable;
};

// Document is a JSON array of "field_id/place" strings, all in the schema.
AnswerabilityAnnotation annotation_from_json(std::string article_id, const Json& doc, const FormSchema& schema);
Json annotation_to_json(const AnswerabilityAnnotation& annotation);
AnswerabilityAnnotation load_annotation(const std::filesystem::path& path, std::string article_id,
                                        const FormSchema& schema);

enum class Verdict { Match, Mismatch, NotAttempted, NoGroundTruth };
std::string_view to_string(Verdict v);
enum class JudgeRule { ExactChoice, DigitTolerance, TimeTolerance, FuzzyText, UnknownSkip };
std::string_view to_string(JudgeRule r);

struct JudgeVerdict {
  std::string article_id;
  PlaceKey key;
  AnswerType answer_type = AnswerType::Text;
  Verdict verdict = Verdict::NoGroundTruth;
  JudgeRule rule = JudgeRule::UnknownSkip;
  bool answerable = false;
  bool has_ground_truth = false;
  std::string gold;
  std::string predicted;
};

class TextJudge {
 public:
  virtual ~TextJudge() = default;
  virtual bool equivalent(const std::string& field, const std::string& gold, const std::string& predicted) = 0;
  virtual std::string id() const = 0;
};

// |A ∩ B| / max(|A|, |B|) over normalized token sets.
double token_overlap(std::string_view a, std::string_view b);

class OfflineTextJudge : public TextJudge {
 public:
  bool equivalent(const std::string& field, const std::string& gold, const std::string& predicted) override;
  std::string id() const override { return "offline-token-overlap"; }
};

// Asks the judge model for a yes/no verdict.
class ModelTextJudge : public TextJudge {
 public:
  ModelTextJudge(ModelGateway& gateway, RetryPolicy retry = {}, const PromptSet& prompts = PromptSet::builtin());
  bool equivalent(const std::string& field, const std::string& gold, const std::string& predicted) override;
  std::string id() const override { return "model:" + gateway_.id(); }

 private:
  ModelGateway& gateway_;
  RetryPolicy retry_;
  const PromptSet& prompts_;
};

struct GoldValue {
  std::string text;
  DigitSemantics semantics = DigitSemantics::Number;
};

// `judge` may be null only when the place is not free text.
JudgeVerdict judge_field(const FieldAnswer& pred, const std::optional<GoldValue>& gold, const AnswerPlace& place,
                         TextJudge* judge, const std::string& field_name = {});

struct Tally {
  std::size_t match = 0;
  std::size_t mismatch = 0;
  double accuracy = 0.0;
  bool defined = false;  // false when match + mismatch == 0
};

struct EvalReport {
  std::size_t n_answerable = 0;
  std::size_t n_attempted = 0;
  std::size_t n_match = 0;
  std::size_t n_mismatch = 0;
  // Unknown answers on answerable places that do have ground truth.
  std::size_t n_missed_with_gold = 0;

  double accuracy = 0.0;
  bool accuracy_defined = false;
  // Counts the missed places above as errors.
  double strict_accuracy = 0.0;
  bool strict_accuracy_defined = false;
  double coverage = 0.0;
  bool coverage_defined = false;

  std::map<AnswerType, Tally> by_answer_type;
  std::map<std::string, Tally> by_field;
  std::vector<JudgeVerdict> verdicts;
};

struct EvalOptions {
  std::size_t max_parallel = 4;
};

// `record` is null for an article with no linked FRA row; every verdict is
// then NoGroundTruth or NotAttempted.
EvalReport compute_report(const PopulatedForm& form, const FraRecord* record, const AnswerabilityAnnotation& annotation,
                          const FormSchema& schema, const Crosswalk& crosswalk, TextJudge& judge,
                          const EvalOptions& options = {});

// Accuracy and coverage restricted to answerable places are pooled over all
// verdicts (micro average).
EvalReport summarize_verdicts(std::vector<JudgeVerdict> verdicts);
EvalReport aggregate_reports(std::span<const EvalReport> reports);

struct RunSummary {
  std::size_t runs = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double coverage_mean = 0.0;
  double coverage_std = 0.0;
};

// Population standard deviation over repeated runs of the same configuration.
RunSummary summarize_runs(std::span<const EvalReport> runs);

Json report_to_json(const EvalReport& report);

}  // namespace form57

#endif  // FORM57_EVALUATION_HPP_
