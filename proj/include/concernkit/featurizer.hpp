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

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace concernkit {

/// Sparse row: strictly increasing indices with their values.
struct SparseVector {
  std::vector<std::uint32_t> index;
  std::vector<float> value;

  std::size_t nnz() const noexcept { return index.size(); }
};

enum class TermWeighting { binary, sublinear };

struct FeaturizerConfig {
  std::uint32_t hash_dims = 1u << 18;
  std::uint32_t hash_seed = 0x5eed1234u;
  int ngram_min = 1;
  int ngram_max = 2;
  TermWeighting tf = TermWeighting::sublinear;
  bool use_idf = false;
  bool l2_normalize = true;

  void validate() const;
  friend bool operator==(const FeaturizerConfig&, const FeaturizerConfig&) = default;
};

nlohmann::ordered_json featurizer_config_to_json(const FeaturizerConfig& c);
FeaturizerConfig featurizer_config_from_json(const nlohmann::json& j);

/// Hashed word n-grams. Words are maximal runs of ASCII alphanumerics or
/// non-ASCII bytes, lowercased; n-grams join words with a single space.
class Featurizer {
 public:
  explicit Featurizer(FeaturizerConfig config = {});

  const FeaturizerConfig& config() const noexcept { return config_; }

  /// Smoothed idf: ln((1 + n) / (1 + df)) + 1. No-op unless use_idf is set.
  void fit(std::span<const std::string> texts);
  bool fitted() const noexcept { return !config_.use_idf || !idf_.empty(); }
  const std::vector<double>& idf() const noexcept { return idf_; }
  void set_idf(std::vector<double> idf);

  SparseVector transform(std::string_view text) const;
  std::vector<SparseVector> transform_all(std::span<const std::string> texts) const;

  /// Bucket of one n-gram key, e.g. "vaccine side".
  std::uint32_t bucket(std::string_view key) const noexcept;

 private:
  void hashed_counts(std::string_view text, std::vector<std::uint32_t>& buckets) const;

  FeaturizerConfig config_;
  std::vector<double> idf_;
};

}  // namespace concernkit
