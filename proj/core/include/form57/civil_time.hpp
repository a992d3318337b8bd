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

#ifndef FORM57_CIVIL_TIME_HPP_
#define FORM57_CIVIL_TIME_HPP_

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace form57 {

using Date = std::chrono::year_month_day;

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM[...]" (date part only) and
// "MM/DD/YYYY". Returns nullopt for anything else or an invalid calendar day.
std::optional<Date> parse_date(std::string_view s);

// Minutes after midnight from "HH:MM", "HH:MM:SS" or "H:MM AM|PM".
std::optional<int> parse_time_of_day(std::string_view s);

// Time component of an ISO date-time ("2023-05-01T14:30"), if present.
std::optional<int> parse_iso_time_component(std::string_view s);

// to - from, in whole days.
int days_between(const Date& from, const Date& to);

std::string format_date(const Date& d);

}  // namespace form57

#endif  // FORM57_CIVIL_TIME_HPP_
