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
#include <string>
#include <vector>

#include "concernkit/taxonomy.hpp"
#include "json.hpp"

namespace concernkit {

/// Undefined ratios (0/0) are reported as 0 and flagged.
struct BinaryMetrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  bool accuracy_undefined = false;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  std::size_t support() const noexcept { return tp + fn; }
};

BinaryMetrics binary_metrics(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn = 0);
BinaryMetrics binary_metrics(const std::vector<bool>& gold, const std::vector<bool>& pred);

struct AveragedMetrics {
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MultilabelReport {
  std::vector<std::string> label_ids;
  std::vector<BinaryMetrics> per_label;
  AveragedMetrics micro;
  AveragedMetrics macro;     // unweighted mean over all labels, zero-support ones included
  AveragedMetrics weighted;  // weighted by support
  AveragedMetrics samples;   // mean of per-passage scores
  std::size_t samples_undefined = 0;  // passages with empty gold and empty prediction
  std::size_t num_samples = 0;
  std::size_t total_support = 0;
};

struct ReportOptions {
  /// Zero-support labels enter the macro mean as 0; off averages over labels with support only.
  bool macro_include_zero_support = true;
};

/// `gold` and `pred` rows must all have label_ids.size() entries.
MultilabelReport multilabel_report(const std::vector<LabelVector>& gold, const std::vector<LabelVector>& pred,
                                   std::vector<std::string> label_ids, const ReportOptions& options = {});

nlohmann::ordered_json report_to_json(const MultilabelReport& r);
std::string report_to_text(const MultilabelReport& r);
/// One row per label, then micro/macro/weighted/samples rows.
std::string report_to_csv(const MultilabelReport& r);
nlohmann::ordered_json binary_metrics_to_json(const BinaryMetrics& m);

struct ThresholdSelection {
  std::vector<double> thresholds;
  std::vector<double> f1;        // F1 on the calibration set at the chosen threshold
  std::vector<bool> defaulted;   // no positives: threshold left at 0.5
};

/// For each column, the candidate maximizing F1 when predicting positive for
/// score >= threshold; ties go to the lower threshold. Candidates are the
/// distinct observed scores, plus 0.5 when `include_half` is set. Columns
/// without positives keep 0.5 and are flagged.
ThresholdSelection best_f1_thresholds(const std::vector<std::vector<double>>& scores,
                                      const std::vector<LabelVector>& gold, bool include_half);

}  // namespace concernkit
