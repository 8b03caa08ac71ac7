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

// Hot loops with an OpenMP implementation and a serial reference. The two
// must agree bit-for-bit; tests and bench/ compare them.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "concernkit/featurizer.hpp"
#include "concernkit/student.hpp"

namespace concernkit::kernels {

/// Probabilities, row-major [text][label].
std::vector<double> score_batch_serial(const StudentModel& m, std::span<const std::string> texts);
/// threads <= 0 uses the OpenMP default.
std::vector<double> score_batch_parallel(const StudentModel& m, std::span<const std::string> texts, int threads);

/// Trailing inclusive window sums of 0/1 columns.
/// `indicators` is row-major [article][concern]; result is [concern][article],
/// where entry i holds the count over articles max(0, i - window + 1) .. i.
std::vector<std::vector<std::uint32_t>> window_counts_serial(std::span<const std::uint8_t> indicators,
                                                             std::size_t num_articles, std::size_t num_concerns,
                                                             std::size_t window);
std::vector<std::vector<std::uint32_t>> window_counts_parallel(std::span<const std::uint8_t> indicators,
                                                               std::size_t num_articles, std::size_t num_concerns,
                                                               std::size_t window, int threads);

}  // namespace concernkit::kernels
