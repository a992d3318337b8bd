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

#include "form57/report_table.hpp"

#include <algorithm>
#include <cstdio>
#include <vector>

namespace form57 {
namespace {

// Column width in code points; the only non-ASCII glyph used is "±".
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], display_width(row[c]));
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c > 0) line += " | ";
      line += rows[r][c];
      if (c + 1 < rows[r].size()) line.append(widths[c] - display_width(rows[r][c]), ' ');
    }
    out += line + "\n";
    if (r == 0) {
      std::string rule;
      for (std::size_t c = 0; c < widths.size(); ++c) {
        if (c > 0) rule += "-|-";
        rule.append(widths[c], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

std::string cell(double mean, double sd, std::size_t runs) {
  return runs > 1 ? format_ratio(mean) + " ± " + format_ratio(sd) : format_ratio(mean);
}

}  // namespace

std::string format_ratio(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string render_qa_table(std::span<const QaTableRow> rows) {
  std::vector<std::vector<std::string>> grid{{"Pipeline", "KIE model", "QA batch", "Accuracy", "Coverage"}};
  for (const auto& r : rows) {
    grid.push_back({r.pipeline, r.kie_model, r.qa_batch, cell(r.summary.accuracy_mean, r.summary.accuracy_std, r.summary.runs),
                    cell(r.summary.coverage_mean, r.summary.coverage_std, r.summary.runs)});
  }
  std::string out = render_grid(grid);
  if (std::any_of(rows.begin(), rows.end(), [](const QaTableRow& r) { return r.summary.runs > 1; })) {
    out += "± is the population standard deviation over repeated runs.\n";
  }
  return out;
}

std::string render_answer_type_table(const EvalReport& report) {
  std::vector<std::vector<std::string>> grid{{"Answer type", "Accuracy", "Judged"}};
  const std::pair<AnswerType, const char*> order[] = {
      {AnswerType::Choice, "Single choice"}, {AnswerType::Digit, "Digit"}, {AnswerType::Text, "Free text"}};
  for (const auto& [type, label] : order) {
    auto it = report.by_answer_type.find(type);
    const Tally t = it == report.by_answer_type.end() ? Tally{} : it->second;
    grid.push_back({label, t.defined ? format_ratio(t.accuracy) : "n/a", std::to_string(t.match + t.mismatch)});
  }
  return render_grid(grid);
}

std::string render_worst_fields(const EvalReport& report, const FormSchema& schema, std::size_t limit) {
  struct Row {
    std::size_t order;
    const FormField* field;
    Tally tally;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < schema.fields().size(); ++i) {
    const FormField& f = schema.fields()[i];
    auto it = report.by_field.find(f.field_id);
    if (it != report.by_field.end() && it->second.defined) rows.push_back({i, &f, it->second});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.tally.accuracy < b.tally.accuracy;
  });
  if (rows.size() > limit) rows.resize(limit);
  std::vector<std::vector<std::string>> grid{{"Field", "Accuracy", "Judged"}};
  for (const auto& r : rows) {
    grid.push_back({r.field->name, format_ratio(r.tally.accuracy), std::to_string(r.tally.match + r.tally.mismatch)});
  }
  return render_grid(grid);
}

}  // namespace form57
