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
#include <istream>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/classifier.hpp"
#include "concernkit/error.hpp"
#include "concernkit/taxonomy.hpp"
#include "json.hpp"

namespace concernkit {

enum class Audience { patient, expert };

struct InterventionDoc {
  std::string id;
  std::string title;
  Audience audience = Audience::patient;
  std::string url;   // may be empty when body is set
  std::string body;
  std::vector<std::string> labels;  // taxonomy node ids, canonical order, non-empty
};

/// |a ∩ b| / |a ∪ b|; two empty sets give 0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Immutable snapshot; replace the whole store to update.
class InterventionStore {
 public:
  InterventionStore() = default;
  /// Validates ids and labels against `taxonomy`; ids must be unique.
  InterventionStore(std::vector<InterventionDoc> docs, const Taxonomy& taxonomy);

  const std::vector<InterventionDoc>& docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

 private:
  std::vector<InterventionDoc> docs_;
};

/// JSONL: {"id","title","audience","url","labels":[ids]} per line.
InterventionStore load_interventions(std::istream& in, const Taxonomy& taxonomy);
nlohmann::ordered_json intervention_to_json(const InterventionDoc& d);

struct InterventionMatch {
  const InterventionDoc* doc = nullptr;
  double score = 0.0;
};

class NoConcernsError : public Error {
 public:
  NoConcernsError() : Error("no_concerns_detected", "no concerns detected") {}
};

/// Ranked by score descending, then id ascending; at most top_k.
/// Throws NoConcernsError for an empty query and ValidationError("empty_store").
std::vector<InterventionMatch> match_interventions(const LabelVector& query, const Taxonomy& taxonomy,
                                                   const InterventionStore& store, std::size_t top_k);

struct ClassifyAndMatchResult {
  Classification classification;
  std::vector<std::string> concerns;  // label_set of the classification
  std::vector<InterventionMatch> matches;
  bool no_concerns = false;
};

/// predict -> label_set -> match. A text with no detected concerns yields
/// no_concerns = true and no matches instead of an error.
ClassifyAndMatchResult classify_and_match(std::string_view text, const ConcernClassifier& model,
                                          const Taxonomy& taxonomy, const InterventionStore& store, std::size_t top_k);

nlohmann::ordered_json classify_and_match_to_json(const ClassifyAndMatchResult& r, const Taxonomy& taxonomy);

}  // namespace concernkit
