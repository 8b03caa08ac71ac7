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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/student.hpp"
#include "concernkit/taxonomy.hpp"

namespace concernkit {

/// True iff some keyword occurs case-insensitively starting at a word
/// boundary, so stems like "vaccin" match "Vaccination".
bool keyword_relevance(std::string_view text, const std::vector<std::string>& keywords);

/// Bundled vaccine keyword stems.
const std::vector<std::string>& default_vaccine_keywords();

struct Classification {
  std::vector<double> scores;
  LabelVector labels;
};

/// Per-passage concern classifier. Implementations are immutable after
/// construction and safe to share between threads.
class ConcernClassifier {
 public:
  virtual ~ConcernClassifier() = default;
  virtual Classification classify(std::string_view text) const = 0;
  virtual std::vector<Classification> classify_batch(const std::vector<std::string>& texts, int threads) const;
  virtual std::size_t num_labels() const = 0;
};

class StudentConcernClassifier final : public ConcernClassifier {
 public:
  /// Throws VersionMismatchError when `model` was not trained on `taxonomy`.
  StudentConcernClassifier(std::shared_ptr<const StudentModel> model, const Taxonomy& taxonomy);
  Classification classify(std::string_view text) const override;
  std::vector<Classification> classify_batch(const std::vector<std::string>& texts, int threads) const override;
  std::size_t num_labels() const override { return model_->num_labels(); }

 private:
  std::shared_ptr<const StudentModel> model_;
};

/// Deterministic rule model: a node fires when any of its cue words appears
/// in the text (word-start match); parents of fired nodes fire too. Score is
/// 1 for fired nodes and 0 otherwise.
class CueRuleClassifier final : public ConcernClassifier {
 public:
  CueRuleClassifier(const Taxonomy& taxonomy, std::map<std::string, std::vector<std::string>> cues);
  Classification classify(std::string_view text) const override;
  std::size_t num_labels() const override { return taxonomy_.size(); }

 private:
  Taxonomy taxonomy_;
  std::vector<std::vector<std::string>> cues_;  // by node index, lowercase
};

/// Relevance pre-filter.
class RelevanceClassifier {
 public:
  virtual ~RelevanceClassifier() = default;
  virtual bool is_relevant(std::string_view text) const = 0;
};

class KeywordRelevanceClassifier final : public RelevanceClassifier {
 public:
  explicit KeywordRelevanceClassifier(std::vector<std::string> keywords = default_vaccine_keywords());
  bool is_relevant(std::string_view text) const override { return keyword_relevance(text, keywords_); }

 private:
  std::vector<std::string> keywords_;
};

class StudentRelevanceClassifier final : public RelevanceClassifier {
 public:
  explicit StudentRelevanceClassifier(std::shared_ptr<const StudentModel> model);
  bool is_relevant(std::string_view text) const override;

 private:
  std::shared_ptr<const StudentModel> model_;
};

/// Multilabel model used as a relevance filter: relevant iff any label fires.
class AnyLabelRelevanceClassifier final : public RelevanceClassifier {
 public:
  explicit AnyLabelRelevanceClassifier(std::shared_ptr<const ConcernClassifier> model) : model_(std::move(model)) {}
  bool is_relevant(std::string_view text) const override { return model_->classify(text).labels.any(); }

 private:
  std::shared_ptr<const ConcernClassifier> model_;
};

}  // namespace concernkit
