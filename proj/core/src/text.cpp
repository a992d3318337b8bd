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

#include "form57/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

namespace form57::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// "12,500": a comma followed by exactly three digits.
bool is_thousands_group(std::string_view s, std::size_t comma) {
  if (comma + 3 >= s.size()) return false;
  for (std::size_t k = comma + 1; k <= comma + 3; ++k) {
    if (!is_digit(s[k])) return false;
  }
  return comma + 4 >= s.size() || !is_digit(s[comma + 4]);
}

}  // namespace

std::string trim(std::string_view s) {
  auto begin = s.begin();
  auto end = s.end();
  while (begin != end && is_space(*begin)) ++begin;
  while (end != begin && is_space(*(end - 1))) --end;
  return std::string(begin, end);
}

std::string casefold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && casefold(a) == casefold(b);
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string normalize(std::string_view s) {
  std::string folded = casefold(s);
  for (char& c : folded) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) c = ' ';
  }
  return collapse_whitespace(folded);
}

std::vector<std::string> tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string norm = normalize(s);
  std::size_t start = 0;
  while (start < norm.size()) {
    std::size_t end = norm.find(' ', start);
    if (end == std::string::npos) end = norm.size();
    if (end > start) out.emplace_back(norm.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::optional<double> first_number(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool digit = std::isdigit(static_cast<unsigned char>(s[i])) != 0;
    const bool signed_digit = s[i] == '-' && i + 1 < s.size() &&
                              std::isdigit(static_cast<unsigned char>(s[i + 1])) != 0;
    if (!digit && !signed_digit) continue;
    std::size_t end = i + 1;
    bool seen_dot = false;
    while (end < s.size()) {
      char c = s[end];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++end;
      } else if (c == '.' && !seen_dot && end + 1 < s.size() &&
                 std::isdigit(static_cast<unsigned char>(s[end + 1]))) {
        seen_dot = true;
        ++end;
      } else if (c == ',' && !seen_dot && is_thousands_group(s, end)) {
        ++end;
      } else {
        break;
      }
    }
    std::string number;
    for (std::size_t k = i; k < end; ++k) {
      if (s[k] != ',') number.push_back(s[k]);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
    if (ec == std::errc() && ptr == number.data() + number.size()) return value;
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<int> first_clock_minutes(std::string_view s) {
  static const std::regex kClock(R"((^|[^0-9])([0-9]{1,2}):([0-5][0-9]))");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(s.begin(), s.end(), m, kClock)) return std::nullopt;
  const int hours = std::stoi(m[2].str());
  const int minutes = std::stoi(m[3].str());
  if (hours > 23) return std::nullopt;
  return hours * 60 + minutes;
}

std::string excerpt(std::string_view s, std::size_t max_len) {
  if (s.size() <= max_len) return std::string(s);
  return std::string(s.substr(0, max_len)) + "...";
}

}  // namespace form57::text
