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

#include "concernkit/kernels.hpp"

#include <omp.h>

#include "concernkit/error.hpp"

namespace concernkit::kernels {

namespace {

void score_one(const StudentModel& m, const std::string& text, double* out) {
  const SparseVector x = m.featurizer.transform(text);
  m.linear.logits(x, out);
  for (std::size_t c = 0; c < m.linear.labels; ++c) out[c] = sigmoid(out[c]);
}

// Sliding sum over one concern column.
void column_counts(std::span<const std::uint8_t> ind, std::size_t n, std::size_t L, std::size_t c, std::size_t window,
                   std::vector<std::uint32_t>& out) {
  out.assign(n, 0);
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += ind[i * L + c];
    if (i >= window) sum -= ind[(i - window) * L + c];
    out[i] = sum;
  }
}

void check_shape(std::span<const std::uint8_t> ind, std::size_t n, std::size_t L, std::size_t window) {
  if (ind.size() != n * L) throw ValidationError("length_mismatch", "indicator matrix has the wrong size");
  if (window < 1) throw ValidationError("invalid_window", "window must be >= 1");
}

}  // namespace

std::vector<double> score_batch_serial(const StudentModel& m, std::span<const std::string> texts) {
  const std::size_t L = m.linear.labels;
  std::vector<double> out(texts.size() * L);
  for (std::size_t i = 0; i < texts.size(); ++i) score_one(m, texts[i], out.data() + i * L);
  return out;
}

std::vector<double> score_batch_parallel(const StudentModel& m, std::span<const std::string> texts, int threads) {
  const std::size_t L = m.linear.labels;
  std::vector<double> out(texts.size() * L);
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(nt)
  for (std::ptrdiff_t i = 0; i < n; ++i) score_one(m, texts[i], out.data() + i * L);
  return out;
}

std::vector<std::vector<std::uint32_t>> window_counts_serial(std::span<const std::uint8_t> indicators,
                                                             std::size_t num_articles, std::size_t num_concerns,
                                                             std::size_t window) {
  check_shape(indicators, num_articles, num_concerns, window);
  std::vector<std::vector<std::uint32_t>> out(num_concerns);
  for (std::size_t c = 0; c < num_concerns; ++c) column_counts(indicators, num_articles, num_concerns, c, window, out[c]);
  return out;
}

std::vector<std::vector<std::uint32_t>> window_counts_parallel(std::span<const std::uint8_t> indicators,
                                                               std::size_t num_articles, std::size_t num_concerns,
                                                               std::size_t window, int threads) {
  check_shape(indicators, num_articles, num_concerns, window);
  std::vector<std::vector<std::uint32_t>> out(num_concerns);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(nt)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(num_concerns); ++c) {
    column_counts(indicators, num_articles, num_concerns, static_cast<std::size_t>(c), window, out[c]);
  }
  return out;
}

}  // namespace concernkit::kernels
