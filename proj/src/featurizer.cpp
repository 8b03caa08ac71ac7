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

#include "concernkit/featurizer.hpp"

#include <algorithm>
#include <cmath>

#include "concernkit/error.hpp"
#include "concernkit/hash.hpp"
#include "concernkit/text.hpp"

namespace concernkit {

void FeaturizerConfig::validate() const {
  if (hash_dims == 0) throw ValidationError("invalid_config", "hash_dims must be positive");
  if (ngram_min < 1 || ngram_max < ngram_min) {
    throw ValidationError("invalid_config", "ngram range must satisfy 1 <= min <= max");
  }
}

nlohmann::ordered_json featurizer_config_to_json(const FeaturizerConfig& c) {
  return {{"hash_dims", c.hash_dims},
          {"hash_seed", c.hash_seed},
          {"ngram_min", c.ngram_min},
          {"ngram_max", c.ngram_max},
          {"tf", c.tf == TermWeighting::binary ? "binary" : "sublinear"},
          {"use_idf", c.use_idf},
          {"l2_normalize", c.l2_normalize}};
}

FeaturizerConfig featurizer_config_from_json(const nlohmann::json& j) {
  FeaturizerConfig c;
  try {
    c.hash_dims = j.at("hash_dims").get<std::uint32_t>();
    c.hash_seed = j.at("hash_seed").get<std::uint32_t>();
    c.ngram_min = j.at("ngram_min").get<int>();
    c.ngram_max = j.at("ngram_max").get<int>();
    const auto tf = j.at("tf").get<std::string>();
    if (tf != "binary" && tf != "sublinear") throw FormatError("unknown tf mode '" + tf + "'");
    c.tf = tf == "binary" ? TermWeighting::binary : TermWeighting::sublinear;
    c.use_idf = j.at("use_idf").get<bool>();
    c.l2_normalize = j.at("l2_normalize").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed featurizer config: ") + e.what());
  }
  c.validate();
  return c;
}

Featurizer::Featurizer(FeaturizerConfig config) : config_(config) { config_.validate(); }

std::uint32_t Featurizer::bucket(std::string_view key) const noexcept {
  return murmur3_32(key, config_.hash_seed) % config_.hash_dims;
}

void Featurizer::hashed_counts(std::string_view text, std::vector<std::uint32_t>& buckets) const {
  std::vector<std::string> words;
  text::for_each_word(text, [&](std::string_view w) { words.push_back(text::to_lower_ascii(w)); });
  std::string key;
  for (std::size_t i = 0; i < words.size(); ++i) {
    key.clear();
    for (int n = 1; n <= config_.ngram_max && i + n <= words.size(); ++n) {
      if (n > 1) key.push_back(' ');
      key += words[i + n - 1];
      if (n >= config_.ngram_min) buckets.push_back(bucket(key));
    }
  }
  std::sort(buckets.begin(), buckets.end());
}

SparseVector Featurizer::transform(std::string_view text) const {
  thread_local std::vector<std::uint32_t> buckets;
  buckets.clear();
  hashed_counts(text, buckets);

  SparseVector v;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    const double count = static_cast<double>(j - i);
    double x = config_.tf == TermWeighting::binary ? 1.0 : 1.0 + std::log(count);
    if (config_.use_idf && !idf_.empty()) x *= idf_[buckets[i]];
    v.index.push_back(buckets[i]);
    v.value.push_back(static_cast<float>(x));
    i = j;
  }
  if (config_.l2_normalize) {
    double norm = 0.0;
    for (float x : v.value) norm += static_cast<double>(x) * x;
    if (norm > 0.0) {
      const double inv = 1.0 / std::sqrt(norm);
      for (float& x : v.value) x = static_cast<float>(x * inv);
    }
  }
  return v;
}

std::vector<SparseVector> Featurizer::transform_all(std::span<const std::string> texts) const {
  std::vector<SparseVector> out(texts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(texts.size()); ++i) out[i] = transform(texts[i]);
  return out;
}

void Featurizer::fit(std::span<const std::string> texts) {
  if (!config_.use_idf) return;
  std::vector<std::uint32_t> df(config_.hash_dims, 0);
  std::vector<std::uint32_t> buckets;
  for (const auto& t : texts) {
    buckets.clear();
    hashed_counts(t, buckets);
    buckets.erase(std::unique(buckets.begin(), buckets.end()), buckets.end());
    for (auto b : buckets) ++df[b];
  }
  const double n = static_cast<double>(texts.size());
  idf_.assign(config_.hash_dims, 0.0);
  for (std::uint32_t i = 0; i < config_.hash_dims; ++i) idf_[i] = std::log((1.0 + n) / (1.0 + df[i])) + 1.0;
}

void Featurizer::set_idf(std::vector<double> idf) {
  if (!idf.empty() && idf.size() != config_.hash_dims) {
    throw ValidationError("invalid_idf", "idf length does not match hash_dims");
  }
  idf_ = std::move(idf);
}

}  // namespace concernkit
