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

#ifndef FORM57_CSV_HPP_
#define FORM57_CSV_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace form57 {

class CsvFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> cells;
};

// RFC 4180: quoted cells may hold commas, doubled quotes and line breaks.
// CRLF and LF line endings are both accepted; blank lines are skipped.
// Throws CsvFormatError on an unterminated quote or stray text after one.
std::vector<CsvRow> parse_csv(std::string_view text);

// Quotes a cell only when it needs quoting.
std::string csv_escape(std::string_view cell);

}  // namespace form57

#endif  // FORM57_CSV_HPP_
