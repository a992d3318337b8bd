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

#ifndef FORM57_TEXT_HPP_
#define FORM57_TEXT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace form57::text {

std::string trim(std::string_view s);

// ASCII lower-casing; non-ASCII bytes pass through unchanged.
std::string casefold(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

// Trims and collapses internal whitespace runs to a single space.
std::string collapse_whitespace(std::string_view s);

// Case-folds, replaces punctuation with spaces and collapses whitespace.
// "Main St." and "main  st" normalize to the same string.
std::string normalize(std::string_view s);

std::vector<std::string> tokens(std::string_view s);

// First decimal number in `s` ("55 mph" -> 55, "-3.5F" -> -3.5).
std::optional<double> first_number(std::string_view s);

// Clock reading "H:MM" or "HH:MM" anywhere in `s`, as minutes past the hour
// origin (no AM/PM adjustment).
std::optional<int> first_clock_minutes(std::string_view s);

std::string excerpt(std::string_view s, std::size_t max_len);

}  // namespace form57::text

#endif  // FORM57_TEXT_HPP_
