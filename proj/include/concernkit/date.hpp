// Copyright 2026 The ConcernKit Authors.
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

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace concernkit {

/// Proleptic Gregorian calendar date, stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  static constexpr Date from_days(std::int64_t days) {
    Date d;
    d.days_ = days;
    return d;
  }

  /// Parses strict "YYYY-MM-DD". Returns nullopt on malformed or impossible dates.
  static std::optional<Date> parse(std::string_view text);

  std::int64_t days_since_epoch() const noexcept { return days_; }
  std::string to_string() const;

  Date operator+(std::int64_t days) const noexcept { return from_days(days_ + days); }
  Date operator-(std::int64_t days) const noexcept { return from_days(days_ - days); }
  std::int64_t operator-(const Date& other) const noexcept { return days_ - other.days_; }

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int64_t days_ = 0;
};

}  // namespace concernkit
