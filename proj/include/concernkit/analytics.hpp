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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "concernkit/date.hpp"
#include "concernkit/error.hpp"
#include "concernkit/taxonomy.hpp"
#include "json.hpp"

namespace concernkit {

struct ArticleLabel {
  std::string doc_id;
  Date date;
  LabelVector labels;
};

/// Element-wise OR over the article's passages. Throws on an empty list.
LabelVector aggregate_article(std::span<const LabelVector> passage_labels);

struct TrendPoint {
  std::size_t index = 0;  // article position in the date-ordered input
  Date date;
  double value = 0.0;
};

struct TrendSeries {
  std::string concern_id;
  std::size_t window = 0;
  std::vector<TrendPoint> points;
};

struct RollingOptions {
  std::size_t window = 500;
  /// Also emit the first window-1 points, averaged over the available prefix.
  bool emit_partial = false;
  /// 1 runs the serial kernel; otherwise concerns are processed in parallel.
  int threads = 1;
};

/// Trailing, inclusive, article-indexed window: point i is the mean over
/// articles i-window+1 .. i. Counts stay integral until one final division.
/// Throws ValidationError("unsorted_input") unless dates are non-decreasing.
std::vector<TrendSeries> rolling_average(std::span<const ArticleLabel> articles,
                                         const std::vector<std::string>& concern_ids,
                                         const RollingOptions& options = {});

/// "index,date,<concern ids...>" then one row per point; values use the
/// shortest representation that round-trips.
std::string trends_to_csv(const std::vector<TrendSeries>& series);
nlohmann::ordered_json trends_to_json(const std::vector<TrendSeries>& series);

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& message) : Error("insufficient_data", message) {}
};

struct EventRow {
  std::string concern_id;
  std::size_t pre_count = 0;
  std::size_t post_count = 0;
  double pre_prop = 0.0;
  double post_prop = 0.0;
  std::optional<double> rel_change;  // nullopt when pre_prop == 0
};

struct EventComparison {
  Date event;
  int pre_days = 0;
  int post_days = 0;
  std::size_t pre_articles = 0;
  std::size_t post_articles = 0;
  std::vector<EventRow> rows;
};

/// Pre window [event - pre_days, event), post window [event, event + post_days).
/// rel_change = (post - pre) / pre. Throws InsufficientDataError when either side is empty.
EventComparison event_comparison(std::span<const ArticleLabel> articles, const std::vector<std::string>& concern_ids,
                                 Date event, int pre_days, int post_days);

/// Signed whole percent: 0.61 -> "+61%", -0.125 -> "-13%"; nullopt -> "n/a".
std::string format_relative_change(std::optional<double> rel_change);
nlohmann::ordered_json event_comparison_to_json(const EventComparison& e);

struct KeywordEntry {
  std::string term;
  std::size_t count = 0;
  friend bool operator==(const KeywordEntry&, const KeywordEntry&) = default;
};

struct KeywordCloud {
  std::string concern_id;
  std::vector<KeywordEntry> entries;  // count descending, then term ascending
};

/// Lowercase word counts over `passages` minus stopwords; top-k.
KeywordCloud keyword_cloud(std::string concern_id, std::span<const std::string> passages,
                           const std::unordered_set<std::string>& stopwords, std::size_t k = 50);
nlohmann::ordered_json keyword_cloud_to_json(const KeywordCloud& cloud);

/// Bundled English stopword list.
const std::unordered_set<std::string>& default_stopwords();

}  // namespace concernkit
