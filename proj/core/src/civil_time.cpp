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

#include "form57/civil_time.hpp"

#include <cstdio>
#include <regex>

#include "form57/text.hpp"

namespace form57 {
namespace {

std::optional<Date> make_date(int y, unsigned m, unsigned d) {
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

}  // namespace

std::optional<Date> parse_date(std::string_view raw) {
  static const std::regex kIso(R"(^(\d{4})-(\d{2})-(\d{2})(?:[T ].*)?$)");
  static const std::regex kUs(R"(^(\d{1,2})/(\d{1,2})/(\d{4})(?: .*)?$)");
  const std::string s = text::trim(raw);
  std::smatch m;
  if (std::regex_match(s, m, kIso)) {
    return make_date(std::stoi(m[1]), static_cast<unsigned>(std::stoi(m[2])),
                     static_cast<unsigned>(std::stoi(m[3])));
  }
  if (std::regex_match(s, m, kUs)) {
    return make_date(std::stoi(m[3]), static_cast<unsigned>(std::stoi(m[1])),
                     static_cast<unsigned>(std::stoi(m[2])));
  }
  return std::nullopt;
}

std::optional<int> parse_time_of_day(std::string_view raw) {
  static const std::regex kClock(
      R"(^(\d{1,2}):(\d{2})(?::\d{2})?\s*([AaPp][Mm])?$)");
  const std::string s = text::trim(raw);
  std::smatch m;
  if (!std::regex_match(s, m, kClock)) return std::nullopt;
  int hours = std::stoi(m[1]);
  const int minutes = std::stoi(m[2]);
  if (minutes > 59) return std::nullopt;
  if (m[3].matched) {
    if (hours < 1 || hours > 12) return std::nullopt;
    const bool pm = m[3].str()[0] == 'P' || m[3].str()[0] == 'p';
    hours %= 12;
    if (pm) hours += 12;
  } else if (hours > 23) {
    return std::nullopt;
  }
  return hours * 60 + minutes;
}

std::optional<int> parse_iso_time_component(std::string_view raw) {
  const std::string s = text::trim(raw);
  const auto sep = s.find_first_of("T ");
  if (sep == std::string::npos || sep != 10) return std::nullopt;
  std::string rest = s.substr(sep + 1);
  // Drop seconds fraction / zone suffixes after HH:MM.
  if (rest.size() > 5) rest = rest.substr(0, 5);
  return parse_time_of_day(rest);
}

int days_between(const Date& from, const Date& to) {
  return static_cast<int>((std::chrono::sys_days{to} - std::chrono::sys_days{from}).count());
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace form57
