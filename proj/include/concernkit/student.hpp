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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/error.hpp"
#include "concernkit/evaluation.hpp"
#include "concernkit/featurizer.hpp"
#include "concernkit/taxonomy.hpp"
#include "json.hpp"

namespace concernkit {

// --- Class weighting ------------------------------------------------------------

enum class WeightingKind { baseline, clamp, no_clamp, log1p };

/// Positive-class weight from raw = negatives / positives:
///   baseline -> 1, clamp(k) -> min(raw, k), no_clamp -> raw, log1p -> ln(1 + raw).
struct WeightingScheme {
  WeightingKind kind = WeightingKind::baseline;
  double clamp_max = 3.0;

  /// Accepts "baseline", "no_clamp", "log1p", "clamp" (k = 3), "clamp3", "clamp:2.5".
  static WeightingScheme parse(std::string_view name);
  std::string name() const;
  friend bool operator==(const WeightingScheme&, const WeightingScheme&) = default;
};

struct ClassWeight {
  double weight = 1.0;
  double raw = 1.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  /// No positives or no negatives: the ratio is meaningless, weight is 1.
  bool degenerate = false;
};

ClassWeight class_weight(std::size_t positives, std::size_t negatives, const WeightingScheme& scheme);
std::vector<ClassWeight> class_weights(std::span<const LabelVector> y, std::size_t num_labels,
                                       const WeightingScheme& scheme);

// --- Linear heads -------------------------------------------------------------

/// One logistic head per label over shared hashed features.
/// Weights are stored feature-major: w[f * labels + c].
struct LinearModel {
  std::uint32_t dims = 0;
  std::size_t labels = 0;
  std::vector<double> w;
  std::vector<double> b;

  LinearModel() = default;
  LinearModel(std::uint32_t dims, std::size_t labels) : dims(dims), labels(labels), w(std::size_t{dims} * labels, 0.0), b(labels, 0.0) {}

  double& at(std::uint32_t f, std::size_t c) { return w[std::size_t{f} * labels + c]; }
  double at(std::uint32_t f, std::size_t c) const { return w[std::size_t{f} * labels + c]; }

  /// Writes `labels` logits into out.
  void logits(const SparseVector& x, double* out) const;
};

double sigmoid(double z) noexcept;

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad_w;  // same layout as LinearModel::w
  std::vector<double> grad_b;
};

/// L = -sum_i sum_c [ w_c y log s + (1 - y) log(1 - s) ] + l2 * ||W||^2,
/// s = sigmoid(W x + b). Bias is not regularized. Dense gradient; meant for
/// small models and verification.
LossGradient weighted_bce(const LinearModel& m, std::span<const SparseVector> x, std::span<const LabelVector> y,
                          std::span<const double> pos_weight, double l2);

struct TrainConfig {
  double learning_rate = 0.5;
  int epochs = 30;
  std::size_t batch_size = 64;
  double l2 = 1e-6;
  std::uint64_t seed = 42;
  WeightingScheme scheme;

  void validate() const;
};

struct TrainResult {
  LinearModel model;
  std::vector<ClassWeight> weights;
  std::vector<double> epoch_loss;  // mean per-sample loss after each epoch
};

class TrainingDivergedError : public Error {
 public:
  explicit TrainingDivergedError(const std::string& message) : Error("training_diverged", message) {}
};

/// Mini-batch gradient descent on the summed batch loss. Deterministic for a
/// given seed. Throws TrainingDivergedError on non-finite weights or loss.
TrainResult train_linear(std::span<const SparseVector> x, std::span<const LabelVector> y, std::uint32_t dims,
                         std::size_t num_labels, const TrainConfig& config);

// --- Student model ---------------------------------------------------------------

enum class StudentTask { relevance, multilabel };
std::string_view to_string(StudentTask t) noexcept;

inline constexpr std::uint32_t kModelFormatVersion = 1;

struct StudentModel {
  StudentTask task = StudentTask::multilabel;
  std::string taxonomy_version;          // empty for relevance models
  std::vector<std::string> label_ids;    // {"relevant"} for relevance models
  Featurizer featurizer;
  LinearModel linear;
  std::vector<double> thresholds;
  nlohmann::json meta = nlohmann::json::object();  // scheme, seed, counts; informational

  std::size_t num_labels() const noexcept { return label_ids.size(); }

  /// Per-label probabilities.
  std::vector<double> scores(std::string_view text) const;
  std::vector<double> scores(const SparseVector& x) const;
  LabelVector predict(std::string_view text) const;
  LabelVector predict(const SparseVector& x) const;

  /// Throws VersionMismatchError when the taxonomy differs from the one trained on.
  void check_taxonomy(const Taxonomy& t) const;
};

/// Fits idf (if configured) and trains the heads. Thresholds start at 0.5.
StudentModel fit_student(StudentTask task, const std::vector<std::string>& label_ids, std::string taxonomy_version,
                         std::span<const std::string> texts, std::span<const LabelVector> labels,
                         const FeaturizerConfig& fcfg, const TrainConfig& tcfg, TrainResult* train = nullptr);

/// Per label, the F1-maximizing threshold over the distinct predicted
/// probabilities plus 0.5; ties go to the lower one. Labels without
/// positives keep 0.5 and are flagged.
ThresholdSelection select_thresholds(StudentModel& m, std::span<const std::string> texts,
                                     std::span<const LabelVector> labels);

struct StudentTrainOutput {
  StudentModel model;
  TrainResult train;
  ThresholdSelection thresholds;
};

/// Fits idf (if configured), trains the heads and picks per-label thresholds
/// on the calibration split (or on the training data when it is empty).
StudentTrainOutput train_student(StudentTask task, const std::vector<std::string>& label_ids,
                                 std::string taxonomy_version, std::span<const std::string> train_texts,
                                 std::span<const LabelVector> train_labels, std::span<const std::string> calib_texts,
                                 std::span<const LabelVector> calib_labels, const FeaturizerConfig& fcfg,
                                 const TrainConfig& tcfg);

/// Binary layout:
///   "CKMODEL\0" | u32 format_version | u32 header_len | u64 file_len | JSON header |
///   f64 weights (label-major rows of dims) | f64 idf (if present) | 32-byte SHA-256 of everything before
/// Integers and floats are little-endian.
std::string serialize_model(const StudentModel& m);
/// FormatError on a bad layout, IntegrityError on a checksum mismatch,
/// VersionMismatchError on an unknown format version.
StudentModel parse_model(std::string_view bytes);
void save_model(const StudentModel& m, const std::filesystem::path& path);
StudentModel load_model(const std::filesystem::path& path);

}  // namespace concernkit
