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

#include "concernkit/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <unordered_map>

#include "concernkit/kernels.hpp"
#include "concernkit/text.hpp"

namespace concernkit {

namespace embedded {
extern const std::string_view kDefaultStopwords;
}

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

LabelVector aggregate_article(std::span<const LabelVector> passage_labels) {
  if (passage_labels.empty()) throw ValidationError("empty_input", "an article needs at least one passage");
  LabelVector out(passage_labels.front().size());
  for (const auto& p : passage_labels) {
    if (p.size() != out.size()) throw ValidationError("length_mismatch", "passage label vectors differ in width");
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c]) out.set(c);
    }
  }
  return out;
}

std::vector<TrendSeries> rolling_average(std::span<const ArticleLabel> articles,
                                         const std::vector<std::string>& concern_ids, const RollingOptions& options) {
  if (options.window < 1) throw ValidationError("invalid_window", "window must be >= 1");
  const std::size_t n = articles.size();
  const std::size_t L = concern_ids.size();
  std::vector<std::uint8_t> ind(n * L);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && articles[i].date < articles[i - 1].date) {
      throw ValidationError("unsorted_input", "articles must be sorted by date (article " + std::to_string(i) +
                                                  " precedes its predecessor)");
    }
    if (articles[i].labels.size() != L) throw ValidationError("length_mismatch", "article label width differs");
    for (std::size_t c = 0; c < L; ++c) ind[i * L + c] = articles[i].labels[c] ? 1 : 0;
  }

  const auto counts = options.threads == 1
                          ? kernels::window_counts_serial(ind, n, L, options.window)
                          : kernels::window_counts_parallel(ind, n, L, options.window, options.threads);
  std::vector<TrendSeries> out(L);
  const std::size_t first = options.emit_partial ? 0 : options.window - 1;
  for (std::size_t c = 0; c < L; ++c) {
    out[c].concern_id = concern_ids[c];
    out[c].window = options.window;
    for (std::size_t i = first; i < n; ++i) {
      const std::size_t denom = std::min(i + 1, options.window);
      out[c].points.push_back({i, articles[i].date, static_cast<double>(counts[c][i]) / static_cast<double>(denom)});
    }
  }
  return out;
}

std::string trends_to_csv(const std::vector<TrendSeries>& series) {
  std::string out = "index,date";
  for (const auto& s : series) out += "," + s.concern_id;
  out += "\n";
  const std::size_t rows = series.empty() ? 0 : series.front().points.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& p = series.front().points[r];
    out += std::to_string(p.index) + "," + p.date.to_string();
    for (const auto& s : series) out += "," + shortest(s.points[r].value);
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json trends_to_json(const std::vector<TrendSeries>& series) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : series) {
    nlohmann::ordered_json pts = nlohmann::ordered_json::array();
    for (const auto& p : s.points) pts.push_back({{"index", p.index}, {"date", p.date.to_string()}, {"value", p.value}});
    arr.push_back({{"concern_id", s.concern_id}, {"window", s.window}, {"points", std::move(pts)}});
  }
  return arr;
}

EventComparison event_comparison(std::span<const ArticleLabel> articles, const std::vector<std::string>& concern_ids,
                                 Date event, int pre_days, int post_days) {
  if (pre_days < 1 || post_days < 1) throw ValidationError("invalid_window", "pre_days and post_days must be >= 1");
  const std::size_t L = concern_ids.size();
  EventComparison e;
  e.event = event;
  e.pre_days = pre_days;
  e.post_days = post_days;
  std::vector<std::size_t> pre(L, 0), post(L, 0);
  const Date pre_start = event - pre_days;
  const Date post_end = event + post_days;
  for (const auto& a : articles) {
    if (a.labels.size() != L) throw ValidationError("length_mismatch", "article label width differs");
    std::vector<std::size_t>* side = nullptr;
    if (a.date >= pre_start && a.date < event) {
      side = &pre;
      ++e.pre_articles;
    } else if (a.date >= event && a.date < post_end) {
      side = &post;
      ++e.post_articles;
    }
    if (!side) continue;
    for (std::size_t c = 0; c < L; ++c) (*side)[c] += a.labels[c] ? 1 : 0;
  }
  if (e.pre_articles == 0 || e.post_articles == 0) {
    throw InsufficientDataError("need at least one article on each side of " + event.to_string() + " (pre: " +
                                std::to_string(e.pre_articles) + ", post: " + std::to_string(e.post_articles) + ")");
  }
  for (std::size_t c = 0; c < L; ++c) {
    EventRow r;
    r.concern_id = concern_ids[c];
    r.pre_count = pre[c];
    r.post_count = post[c];
    r.pre_prop = static_cast<double>(pre[c]) / static_cast<double>(e.pre_articles);
    r.post_prop = static_cast<double>(post[c]) / static_cast<double>(e.post_articles);
    if (pre[c] > 0) r.rel_change = (r.post_prop - r.pre_prop) / r.pre_prop;
    e.rows.push_back(std::move(r));
  }
  return e;
}

std::string format_relative_change(std::optional<double> rel_change) {
  if (!rel_change || !std::isfinite(*rel_change)) return "n/a";
  const long long pct = std::llround(*rel_change * 100.0);
  return (pct < 0 ? "-" : "+") + std::to_string(pct < 0 ? -pct : pct) + "%";
}

nlohmann::ordered_json event_comparison_to_json(const EventComparison& e) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : e.rows) {
    nlohmann::ordered_json j{{"concern_id", r.concern_id}, {"pre_count", r.pre_count}, {"post_count", r.post_count},
                             {"pre_prop", r.pre_prop},     {"post_prop", r.post_prop}};
    j["rel_change"] = r.rel_change ? nlohmann::ordered_json(*r.rel_change) : nlohmann::ordered_json(nullptr);
    j["rel_change_undefined"] = !r.rel_change.has_value();
    j["rel_change_text"] = format_relative_change(r.rel_change);
    rows.push_back(std::move(j));
  }
  return {{"event_date", e.event.to_string()}, {"pre_days", e.pre_days},         {"post_days", e.post_days},
          {"pre_articles", e.pre_articles},    {"post_articles", e.post_articles}, {"concerns", std::move(rows)}};
}

KeywordCloud keyword_cloud(std::string concern_id, std::span<const std::string> passages,
                           const std::unordered_set<std::string>& stopwords, std::size_t k) {
  if (k < 1) throw ValidationError("invalid_argument", "k must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& p : passages) {
    text::for_each_word(p, [&](std::string_view w) {
      std::string lw = text::to_lower_ascii(w);
      if (!stopwords.contains(lw)) ++counts[std::move(lw)];
    });
  }
  KeywordCloud cloud;
  cloud.concern_id = std::move(concern_id);
  for (auto& [term, n] : counts) cloud.entries.push_back({term, n});
  auto order = [](const KeywordEntry& a, const KeywordEntry& b) {
    return a.count != b.count ? a.count > b.count : a.term < b.term;
  };
  if (cloud.entries.size() > k) {
    std::partial_sort(cloud.entries.begin(), cloud.entries.begin() + static_cast<std::ptrdiff_t>(k),
                      cloud.entries.end(), order);
    cloud.entries.resize(k);
  } else {
    std::sort(cloud.entries.begin(), cloud.entries.end(), order);
  }
  return cloud;
}

nlohmann::ordered_json keyword_cloud_to_json(const KeywordCloud& cloud) {
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& e : cloud.entries) entries.push_back({{"term", e.term}, {"count", e.count}});
  return {{"concern_id", cloud.concern_id}, {"entries", std::move(entries)}};
}

const std::unordered_set<std::string>& default_stopwords() {
  static const std::unordered_set<std::string> s = text::parse_word_list(embedded::kDefaultStopwords);
  return s;
}

}  // namespace concernkit
