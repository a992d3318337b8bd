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

#ifndef FORM57_REPORT_TABLE_HPP_
#define FORM57_REPORT_TABLE_HPP_

#include <cstddef>
#include <span>
#include <string>

#include "form57/evaluation.hpp"
#include "form57/schema.hpp"

namespace form57 {

struct QaTableRow {
  std::string pipeline;   // e.g. "Grouped QA"
  std::string kie_model;  // model that produced the schema and grouping
  std::string qa_batch;   // single / all / group
  RunSummary summary;
};

// Pipeline | KIE model | QA batch | Accuracy | Coverage, with "mean ± std"
// cells when a row summarizes more than one run.
std::string render_qa_table(std::span<const QaTableRow> rows);

// Answer type | Accuracy | Judged, over the three answer types.
std::string render_answer_type_table(const EvalReport& report);

// Lowest-accuracy fields first; ties broken by schema order.
std::string render_worst_fields(const EvalReport& report, const FormSchema& schema, std::size_t limit = 5);

// Fixed two-decimal rendering used by every table.
std::string format_ratio(double value);

}  // namespace form57

#endif  // FORM57_REPORT_TABLE_HPP_
