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

// Seeded synthetic corpora with planted cue-word -> label rules, and a rule
// teacher that answers the real prompts from the same rules. Used by tests,
// the acceptance suite, benchmarks and `concernkit synth`.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "concernkit/date.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/taxonomy.hpp"
#include "concernkit/teacher.hpp"

namespace concernkit {

struct SyntheticPassage {
  std::string id;
  std::string text;
  LabelVector labels;    // closed under the hierarchy; all zero for irrelevant passages
  bool relevant = true;
};

struct SyntheticConfig {
  std::uint64_t seed = 7;
  std::size_t count = 2000;
  std::string rare_label = "5.4";
  double rare_rate = 0.03;
  double parent_only_rate = 0.10;
  /// Fractions of the corpus that are off-topic, or on-topic without any concern.
  double irrelevant_rate = 0.0;
  double relevant_no_concern_rate = 0.0;
  /// Chance that an off-topic passage borrows a concern cue word.
  double distractor_rate = 0.5;
  std::string id_prefix = "syn";
};

/// Cue words per node id (lowercase). A node fires when one of its cues starts a word.
const std::map<std::string, std::vector<std::string>>& synthetic_cues();

std::vector<SyntheticPassage> generate_synthetic(const Taxonomy& taxonomy, const SyntheticConfig& config);

/// Groups consecutive passages into dated documents (1-3 paragraphs each,
/// one document per day from `start`). Passage ids follow segment(): "<doc>:p<i>".
struct SyntheticCorpus {
  std::vector<Document> documents;
  std::vector<SyntheticPassage> passages;  // ids rewritten to the segment() passage ids
};
SyntheticCorpus synthetic_corpus(const Taxonomy& taxonomy, const SyntheticConfig& config, Date start);

/// Answers relevance, all-in-one and individual prompts from the planted rules.
/// `flip_rate` > 0 corrupts each multilabel answer bit with that probability (seeded by prompt).
std::unique_ptr<ScriptedTeacher> make_rule_teacher(const Taxonomy& taxonomy, double flip_rate = 0.0);

}  // namespace concernkit
