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

#include "form57/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "form57/parallel.hpp"
#include "form57/text.hpp"

namespace form57 {
namespace {

constexpr double kExactEpsilon = 1e-9;

const std::map<std::string, DigitSemantics>& semantics_names() {
  static const std::map<std::string, DigitSemantics> names{
      {"number", DigitSemantics::Number}, {"time", DigitSemantics::Time}, {"speed", DigitSemantics::Speed}};
  return names;
}

const std::set<std::string>& cue_names() {
  static const std::set<std::string> names{"user_sex", "user_age", "killed", "injured", "highway_name"};
  return names;
}

std::string display(const AnswerValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UnknownValue>) {
          return "Unknown";
        } else if constexpr (std::is_same_v<T, TextValue>) {
          return v.text;
        } else if constexpr (std::is_same_v<T, DigitValue>) {
          return Json(v.value).dump();
        } else {
          return v.code;
        }
      },
      value);
}

std::optional<long long> gold_minutes(const std::string& gold) {
  if (auto clock = text::first_clock_minutes(gold)) return *clock;
  if (auto hours = text::first_number(gold)) return std::llround(*hours * 60.0);
  return std::nullopt;
}

std::optional<int> whole_count(const FieldAnswer* answer) {
  if (answer == nullptr) return std::nullopt;
  const auto* digit = std::get_if<DigitValue>(&answer->value);
  if (digit == nullptr || digit->value < 0 || std::abs(digit->value - std::round(digit->value)) > kExactEpsilon) {
    return std::nullopt;
  }
  return static_cast<int>(std::llround(digit->value));
}

void tally(Tally& t, Verdict v) {
  if (v == Verdict::Match) ++t.match;
  if (v == Verdict::Mismatch) ++t.mismatch;
}

void finish(Tally& t) {
  const std::size_t judged = t.match + t.mismatch;
  t.defined = judged > 0;
  t.accuracy = t.defined ? static_cast<double>(t.match) / static_cast<double>(judged) : 0.0;
}

Json tally_json(const Tally& t) {
  return Json{{"match", t.match}, {"mismatch", t.mismatch}, {"accuracy", t.accuracy}, {"defined", t.defined}};
}

std::string_view answer_type_label(AnswerType type) {
  switch (type) {
    case AnswerType::Choice:
      return "Single choice";
    case AnswerType::Digit:
      return "Digit";
    case AnswerType::Text:
      return "Free text";
  }
  return "Free text";
}

}  // namespace

Crosswalk Crosswalk::from_json(const Json& doc) {
  if (!doc.is_object()) throw SchemaFormatError("", "crosswalk must be an object");
  Crosswalk cw;
  if (doc.contains("version")) {
    if (!doc["version"].is_string()) throw SchemaFormatError("/version", "expected a string");
    cw.version_ = doc["version"].get<std::string>();
  }
  if (!doc.contains("fields") || !doc["fields"].is_object()) throw SchemaFormatError("/fields", "expected an object");
  for (auto it = doc["fields"].begin(); it != doc["fields"].end(); ++it) {
    const std::string path = "/fields/" + it.key();
    auto key = PlaceKey::parse(it.key());
    if (!key) throw SchemaFormatError(path, "key must look like field_id/place");
    const Json& e = it.value();
    if (!e.is_object() || !e.contains("column") || !e["column"].is_string()) {
      throw SchemaFormatError(path, "entry needs a string \"column\"");
    }
    CrosswalkEntry entry;
    entry.column = text::casefold(text::trim(e["column"].get<std::string>()));
    for (auto f = e.begin(); f != e.end(); ++f) {
      if (f.key() == "column") continue;
      if (f.key() == "pattern") {
        if (!f->is_string()) throw SchemaFormatError(path + "/pattern", "expected a string");
        entry.pattern = f->get<std::string>();
        std::regex re;
        try {
          re = std::regex(*entry.pattern);
        } catch (const std::regex_error& err) {
          throw SchemaFormatError(path + "/pattern", std::string("bad regex: ") + err.what());
        }
        if (re.mark_count() != 1) throw SchemaFormatError(path + "/pattern", "needs exactly one capture group");
        cw.patterns_.emplace(*key, std::move(re));
      } else if (f.key() == "values") {
        if (!f->is_object()) throw SchemaFormatError(path + "/values", "expected an object");
        for (auto v = f->begin(); v != f->end(); ++v) {
          if (!v->is_string()) throw SchemaFormatError(path + "/values/" + v.key(), "expected a string");
          entry.values.emplace(v.key(), v->get<std::string>());
        }
      } else if (f.key() == "semantics") {
        auto s = f->is_string() ? semantics_names().find(f->get<std::string>()) : semantics_names().end();
        if (s == semantics_names().end()) throw SchemaFormatError(path + "/semantics", "expected number, time or speed");
        entry.semantics = s->second;
      } else {
        throw SchemaFormatError(path + "/" + f.key(), "unexpected key");
      }
    }
    cw.entries_.emplace(*key, std::move(entry));
  }
  if (doc.contains("cues")) {
    if (!doc["cues"].is_object()) throw SchemaFormatError("/cues", "expected an object");
    for (auto it = doc["cues"].begin(); it != doc["cues"].end(); ++it) {
      const std::string path = "/cues/" + it.key();
      if (!cue_names().contains(it.key())) throw SchemaFormatError(path, "unknown cue");
      auto key = it->is_string() ? PlaceKey::parse(it->get<std::string>()) : std::nullopt;
      if (!key) throw SchemaFormatError(path, "expected a field_id/place string");
      cw.cues_.emplace(it.key(), *key);
    }
  }
  return cw;
}

Crosswalk Crosswalk::from_file(const std::filesystem::path& path) {
  try {
    return from_json(read_json_file(path));
  } catch (const SchemaFormatError& e) {
    throw FileError(path, e.what());
  }
}

const CrosswalkEntry* Crosswalk::find(const PlaceKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> Crosswalk::gold_value(const PlaceKey& key,
                                                 const std::map<std::string, std::string>& raw) const {
  const CrosswalkEntry* entry = find(key);
  if (entry == nullptr) throw CrosswalkMissing(key.str());
  auto cell = raw.find(entry->column);
  if (cell == raw.end()) return std::nullopt;
  std::string value = text::trim(cell->second);
  if (auto re = patterns_.find(key); re != patterns_.end()) {
    std::smatch m;
    if (!std::regex_search(value, m, re->second)) return std::nullopt;
    value = text::trim(m.str(1));
  }
  if (value.empty()) return std::nullopt;
  if (entry->values.empty()) return value;
  if (auto v = entry->values.find(value); v != entry->values.end()) return v->second;
  for (const auto& [from, to] : entry->values) {
    if (text::iequals(from, value)) return to;
  }
  return std::nullopt;
}

void Crosswalk::check_against(const FormSchema& schema) const {
  for (const auto& [key, entry] : entries_) {
    const std::string path = "/fields/" + key.str();
    const AnswerPlace* place = schema.find(key);
    if (place == nullptr) throw SchemaFormatError(path, "not an answer place of the schema");
    if (entry.semantics != DigitSemantics::Number && place->answer_type != AnswerType::Digit) {
      throw SchemaFormatError(path, "time/speed semantics need a digit place");
    }
    for (const auto& [from, code] : entry.values) {
      if (place->answer_type != AnswerType::Choice || place->choices.find_code(code) == nullptr) {
        throw SchemaFormatError(path + "/values/" + from, "\"" + code + "\" is not a choice code of the place");
      }
    }
  }
  for (const auto& [cue, key] : cues_) {
    if (schema.find(key) == nullptr) throw SchemaFormatError("/cues/" + cue, "not an answer place of the schema");
  }
}

LinkageCues cues_from_form(const PopulatedForm& form, const Crosswalk& crosswalk) {
  LinkageCues cues;
  auto answer = [&](const char* cue) -> const FieldAnswer* {
    auto it = crosswalk.cues().find(cue);
    if (it == crosswalk.cues().end()) return nullptr;
    const FieldAnswer* a = form.find(it->second);
    return a != nullptr && !a->is_unknown() ? a : nullptr;
  };

  if (const FieldAnswer* a = answer("user_sex")) {
    if (const auto* choice = std::get_if<ChoiceValue>(&a->value)) {
      const CrosswalkEntry* entry = crosswalk.find(a->key);
      if (entry != nullptr) {
        for (const auto& [from, code] : entry->values) {
          if (code == choice->code) cues.user_sex = parse_sex(from);
        }
      }
      if (!cues.user_sex) cues.user_sex = parse_sex(choice->code);
    } else if (const auto* t = std::get_if<TextValue>(&a->value)) {
      cues.user_sex = parse_sex(t->text);
    }
  }
  cues.user_age = whole_count(answer("user_age"));
  cues.killed = whole_count(answer("killed"));
  cues.injured = whole_count(answer("injured"));
  if (const FieldAnswer* a = answer("highway_name")) {
    if (const auto* t = std::get_if<TextValue>(&a->value); t != nullptr && !t->text.empty()) cues.highway_name = t->text;
  }
  return cues;
}

AnswerabilityAnnotation annotation_from_json(std::string article_id, const Json& doc, const FormSchema& schema) {
  if (!doc.is_array()) throw SchemaFormatError("", "annotation must be an array of field_id/place strings");
  AnswerabilityAnnotation ann{std::move(article_id), {}};
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "/" + std::to_string(i);
    auto key = doc[i].is_string() ? PlaceKey::parse(doc[i].get<std::string>()) : std::nullopt;
    if (!key) throw SchemaFormatError(path, "expected a field_id/place string");
    if (schema.find(*key) == nullptr) throw SchemaFormatError(path, key->str() + " is not an answer place of the schema");
    if (!ann.answerable.insert(*key).second) throw SchemaFormatError(path, "duplicate key " + key->str());
  }
  return ann;
}

Json annotation_to_json(const AnswerabilityAnnotation& annotation) {
  Json out = Json::array();
  for (const auto& key : annotation.answerable) out.push_back(key.str());
  return out;
}

AnswerabilityAnnotation load_annotation(const std::filesystem::path& path, std::string article_id,
                                        const FormSchema& schema) {
  try {
    return annotation_from_json(std::move(article_id), read_json_file(path), schema);
  } catch (const SchemaFormatError& e) {
    throw FileError(path, e.what());
  }
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Match:
      return "Match";
    case Verdict::Mismatch:
      return "Mismatch";
    case Verdict::NotAttempted:
      return "NotAttempted";
    case Verdict::NoGroundTruth:
      return "NoGroundTruth";
  }
  return "NoGroundTruth";
}

std::string_view to_string(JudgeRule r) {
  switch (r) {
    case JudgeRule::ExactChoice:
      return "ExactChoice";
    case JudgeRule::DigitTolerance:
      return "DigitTolerance";
    case JudgeRule::TimeTolerance:
      return "TimeTolerance";
    case JudgeRule::FuzzyText:
      return "FuzzyText";
    case JudgeRule::UnknownSkip:
      return "UnknownSkip";
  }
  return "UnknownSkip";
}

double token_overlap(std::string_view a, std::string_view b) {
  const auto ta = text::tokens(a);
  const auto tb = text::tokens(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  return static_cast<double>(common) / static_cast<double>(std::max(sa.size(), sb.size()));
}

bool OfflineTextJudge::equivalent(const std::string&, const std::string& gold, const std::string& predicted) {
  return token_overlap(gold, predicted) >= kOfflineOverlapThreshold;
}

ModelTextJudge::ModelTextJudge(ModelGateway& gateway, RetryPolicy retry, const PromptSet& prompts)
    : gateway_(gateway), retry_(retry), prompts_(prompts) {}

bool ModelTextJudge::equivalent(const std::string& field, const std::string& gold, const std::string& predicted) {
  ModelRequest request;
  request.role = ModelRole::Judge;
  request.label = "eval.judge";
  request.system_prompt = prompts_.get("judge.system");
  request.user_parts.emplace_back(
      TextPart{prompts_.render("judge.user", {{"field", field}, {"gold", gold}, {"prediction", predicted}})});
  request.temperature = 0.0;
  request.max_output_tokens = 16;
  const auto words = text::tokens(complete_with_retry(gateway_, request, retry_).text);
  return !words.empty() && words.front() == "yes";
}

JudgeVerdict judge_field(const FieldAnswer& pred, const std::optional<GoldValue>& gold, const AnswerPlace& place,
                         TextJudge* judge, const std::string& field_name) {
  JudgeVerdict v;
  v.key = pred.key;
  v.answer_type = place.answer_type;
  v.predicted = display(pred.value);
  switch (place.answer_type) {
    case AnswerType::Choice:
      v.rule = JudgeRule::ExactChoice;
      break;
    case AnswerType::Digit:
      v.rule = gold && gold->semantics == DigitSemantics::Time ? JudgeRule::TimeTolerance : JudgeRule::DigitTolerance;
      break;
    case AnswerType::Text:
      v.rule = JudgeRule::FuzzyText;
      break;
  }
  std::optional<long long> gold_mins;
  std::optional<double> gold_number;
  if (gold && !text::trim(gold->text).empty()) {
    v.gold = gold->text;
    v.has_ground_truth = true;
    if (place.answer_type == AnswerType::Digit) {
      if (gold->semantics == DigitSemantics::Time) {
        gold_mins = gold_minutes(gold->text);
        v.has_ground_truth = gold_mins.has_value();
      } else {
        gold_number = text::first_number(gold->text);
        v.has_ground_truth = gold_number.has_value();
      }
    }
  }

  if (pred.is_unknown()) {
    v.verdict = Verdict::NotAttempted;
    v.rule = JudgeRule::UnknownSkip;
    return v;
  }
  if (!v.has_ground_truth) {
    v.verdict = Verdict::NoGroundTruth;
    return v;
  }

  bool match = false;
  switch (place.answer_type) {
    case AnswerType::Choice: {
      const auto* c = std::get_if<ChoiceValue>(&pred.value);
      match = c != nullptr && text::casefold(text::trim(c->code)) == text::casefold(text::trim(gold->text));
      break;
    }
    case AnswerType::Digit: {
      const auto* d = std::get_if<DigitValue>(&pred.value);
      if (d == nullptr) break;
      if (gold_mins) {
        match = std::llabs(std::llround(d->value * 60.0) - *gold_mins) <= kTimeToleranceMinutes;
      } else if (gold->semantics == DigitSemantics::Speed) {
        match = std::abs(d->value - *gold_number) <= kSpeedToleranceMph + kExactEpsilon;
      } else {
        match = std::abs(d->value - *gold_number) <= kExactEpsilon;
      }
      break;
    }
    case AnswerType::Text: {
      const auto* t = std::get_if<TextValue>(&pred.value);
      if (t == nullptr) break;
      if (judge == nullptr) throw std::invalid_argument("free-text judging needs a text judge");
      match = judge->equivalent(field_name, gold->text, t->text);
      break;
    }
  }
  v.verdict = match ? Verdict::Match : Verdict::Mismatch;
  return v;
}

EvalReport compute_report(const PopulatedForm& form, const FraRecord* record, const AnswerabilityAnnotation& annotation,
                          const FormSchema& schema, const Crosswalk& crosswalk, TextJudge& judge,
                          const EvalOptions& options) {
  const std::vector<PlaceKey> keys = schema.place_keys();
  std::vector<JudgeVerdict> verdicts(keys.size());
  parallel_for(keys.size(), options.max_parallel, [&](std::size_t i) {
    const PlaceKey& key = keys[i];
    const FormField* field = schema.find(key.field_id);
    const AnswerPlace* place = schema.find(key);
    const FieldAnswer* found = form.find(key);
    const FieldAnswer pred = found != nullptr ? *found : FieldAnswer{key, UnknownValue{}, ""};
    std::optional<GoldValue> gold;
    if (record != nullptr) {
      try {
        if (auto value = crosswalk.gold_value(key, record->raw_fields)) {
          gold = GoldValue{*value, crosswalk.find(key)->semantics};
        }
      } catch (const CrosswalkMissing&) {
      }
    }
    JudgeVerdict v = judge_field(pred, gold, *place, &judge, field->name);
    v.article_id = form.article_id;
    v.answerable = annotation.answerable.contains(key);
    verdicts[i] = std::move(v);
  });
  return summarize_verdicts(std::move(verdicts));
}

EvalReport summarize_verdicts(std::vector<JudgeVerdict> verdicts) {
  EvalReport r;
  for (const auto& v : verdicts) {
    if (!v.answerable) continue;
    ++r.n_answerable;
    if (v.verdict != Verdict::NotAttempted) ++r.n_attempted;
    if (v.verdict == Verdict::NotAttempted && v.has_ground_truth) ++r.n_missed_with_gold;
    if (v.verdict == Verdict::Match) ++r.n_match;
    if (v.verdict == Verdict::Mismatch) ++r.n_mismatch;
    if (v.verdict == Verdict::Match || v.verdict == Verdict::Mismatch) {
      tally(r.by_answer_type[v.answer_type], v.verdict);
      tally(r.by_field[v.key.field_id], v.verdict);
    }
  }
  for (auto& [_, t] : r.by_answer_type) finish(t);
  for (auto& [_, t] : r.by_field) finish(t);

  const std::size_t judged = r.n_match + r.n_mismatch;
  r.accuracy_defined = judged > 0;
  r.accuracy = r.accuracy_defined ? static_cast<double>(r.n_match) / static_cast<double>(judged) : 0.0;
  const std::size_t strict = judged + r.n_missed_with_gold;
  r.strict_accuracy_defined = strict > 0;
  r.strict_accuracy = r.strict_accuracy_defined ? static_cast<double>(r.n_match) / static_cast<double>(strict) : 0.0;
  r.coverage_defined = r.n_answerable > 0;
  r.coverage =
      r.coverage_defined ? static_cast<double>(r.n_attempted) / static_cast<double>(r.n_answerable) : 0.0;
  r.verdicts = std::move(verdicts);
  return r;
}

EvalReport aggregate_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate_reports needs at least one report");
  std::vector<JudgeVerdict> pooled;
  for (const auto& r : reports) pooled.insert(pooled.end(), r.verdicts.begin(), r.verdicts.end());
  std::stable_sort(pooled.begin(), pooled.end(),
                   [](const JudgeVerdict& a, const JudgeVerdict& b) { return a.article_id < b.article_id; });
  return summarize_verdicts(std::move(pooled));
}

RunSummary summarize_runs(std::span<const EvalReport> runs) {
  RunSummary s;
  s.runs = runs.size();
  if (runs.empty()) return s;
  auto mean_std = [&](auto field, double& mean, double& sd) {
    double sum = 0.0;
    for (const auto& r : runs) sum += field(r);
    mean = sum / static_cast<double>(runs.size());
    double sq = 0.0;
    for (const auto& r : runs) sq += (field(r) - mean) * (field(r) - mean);
    sd = std::sqrt(sq / static_cast<double>(runs.size()));
  };
  mean_std([](const EvalReport& r) { return r.accuracy; }, s.accuracy_mean, s.accuracy_std);
  mean_std([](const EvalReport& r) { return r.coverage; }, s.coverage_mean, s.coverage_std);
  return s;
}

Json report_to_json(const EvalReport& report) {
  Json by_type = Json::object();
  for (AnswerType t : {AnswerType::Choice, AnswerType::Digit, AnswerType::Text}) {
    auto it = report.by_answer_type.find(t);
    by_type[std::string(answer_type_label(t))] = tally_json(it == report.by_answer_type.end() ? Tally{} : it->second);
  }
  Json by_field = Json::object();
  for (const auto& [id, t] : report.by_field) by_field[id] = tally_json(t);
  Json verdicts = Json::array();
  for (const auto& v : report.verdicts) {
    verdicts.push_back({{"article_id", v.article_id},
                        {"key", v.key.str()},
                        {"answer_type", std::string(to_string(v.answer_type))},
                        {"verdict", std::string(to_string(v.verdict))},
                        {"rule", std::string(to_string(v.rule))},
                        {"answerable", v.answerable},
                        {"has_ground_truth", v.has_ground_truth},
                        {"gold", v.gold},
                        {"predicted", v.predicted}});
  }
  return Json{{"accuracy", report.accuracy},
              {"accuracy_defined", report.accuracy_defined},
              {"strict_accuracy", report.strict_accuracy},
              {"strict_accuracy_defined", report.strict_accuracy_defined},
              {"coverage", report.coverage},
              {"coverage_defined", report.coverage_defined},
              {"n_answerable", report.n_answerable},
              {"n_attempted", report.n_attempted},
              {"n_match", report.n_match},
              {"n_mismatch", report.n_mismatch},
              {"n_missed_with_gold", report.n_missed_with_gold},
              {"by_answer_type", std::move(by_type)},
              {"by_field", std::move(by_field)},
              {"verdicts", std::move(verdicts)}};
}

}  // namespace form57
