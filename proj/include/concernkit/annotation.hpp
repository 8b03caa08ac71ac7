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

#include <atomic>
#include <cstddef>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "concernkit/evaluation.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/persistence.hpp"
#include "concernkit/taxonomy.hpp"
#include "concernkit/teacher.hpp"

namespace concernkit {

enum class Provenance { teacher, human, student };
std::string_view to_string(Provenance p) noexcept;
Provenance provenance_from_string(std::string_view s);

enum class AnnotationTask { relevance, multilabel };
std::string_view to_string(AnnotationTask t) noexcept;
AnnotationTask annotation_task_from_string(std::string_view s);

/// Labels for one passage. Relevance records hold a single-entry vector.
/// Invalid records carry all-zero labels and are excluded from training.
struct AnnotationRecord {
  std::string passage_id;
  LabelVector labels;
  Provenance provenance = Provenance::teacher;
  std::optional<std::string> raw_response;
  bool valid = true;
  int retries_used = 0;
};

/// Export line: {"passage_id", "labels": {node_id: 0/1}, "provenance", "valid"}.
/// Relevance records use the single key "relevant".
nlohmann::ordered_json annotation_to_json(const AnnotationRecord& r, AnnotationTask task, const Taxonomy& t);
AnnotationRecord annotation_from_json(const nlohmann::json& j, AnnotationTask task, const Taxonomy& t);
std::vector<AnnotationRecord> read_annotations(std::istream& in, AnnotationTask task, const Taxonomy& t);
void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records, AnnotationTask task,
                       const Taxonomy& t);

/// Teacher responses keyed by SHA-256 of (prompt, model). Concurrent reads,
/// serialized writes; entries live in the "teacher_cache" collection.
class AnnotationCache {
 public:
  explicit AnnotationCache(DataStore& store) : store_(store) {}

  static std::string key(std::string_view prompt, std::string_view model_name);

  std::optional<std::string> get(const std::string& key);
  void put(const std::string& key, std::string_view model_name, std::string_view response);

  std::size_t hits() const noexcept { return hits_.load(); }
  std::size_t misses() const noexcept { return misses_.load(); }

 private:
  DataStore& store_;
  std::shared_mutex mutex_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

struct AnnotationReport {
  std::size_t total = 0;
  std::size_t valid = 0;
  std::size_t invalid = 0;
  std::size_t cache_hits = 0;
  std::size_t teacher_calls = 0;
  std::size_t transport_errors = 0;
  std::size_t parse_errors = 0;
  std::vector<std::string> invalid_passages;
};

class TeacherUnreachableError : public Error {
 public:
  explicit TeacherUnreachableError(const std::string& message) : Error("teacher_unreachable", message) {}
};

struct AnnotateOptions {
  AnnotationTask task = AnnotationTask::multilabel;
  /// Called after each finished passage with (done, total); may be called from worker threads.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// One record per passage, in input order. Cached responses are reused; the
/// teacher is retried up to `cfg.retry_limit` times with exponential backoff.
/// Throws TeacherUnreachableError only when every passage hit transport errors.
std::vector<AnnotationRecord> annotate_corpus(std::span<const Passage> passages, const Taxonomy& t,
                                              TeacherClient& teacher, const TeacherConfig& cfg,
                                              AnnotationCache* cache, const AnnotateOptions& options = {},
                                              AnnotationReport* report = nullptr);

// --- Individual prompting ------------------------------------------------------

/// Positive fraction per (passage, node) from `samples_per_label` single-label
/// teacher samples. Unparseable samples count as negative.
std::vector<std::vector<double>> sample_individual_fractions(std::span<const Passage> passages, const Taxonomy& t,
                                                             TeacherClient& teacher, int samples_per_label);

/// Per node, the observed fraction that maximizes F1 on `gold` when predicting
/// positive for fraction >= threshold; ties go to the lower threshold.
/// `fractions[i][c]` aligns with `gold[i][c]`.
ThresholdSelection individual_threshold(int samples_per_label, const std::vector<std::vector<double>>& fractions,
                                        const std::vector<LabelVector>& gold);

// --- Two-stage pipeline ------------------------------------------------------------

/// Passages the relevance predicate accepts, in input order.
std::vector<Passage> relevance_filter_pipeline(std::span<const Passage> passages,
                                               const std::function<bool(const std::string&)>& is_relevant);

}  // namespace concernkit
