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

#include "concernkit/classifier.hpp"

#include "concernkit/kernels.hpp"
#include "concernkit/text.hpp"

namespace concernkit {

namespace embedded {
extern const std::string_view kVaccineKeywords;
}

namespace {

bool contains_at_word_start(const std::string& lower_text, const std::vector<std::string>& lower_keys) {
  for (const auto& k : lower_keys) {
    if (k.empty()) continue;
    for (auto pos = lower_text.find(k); pos != std::string::npos; pos = lower_text.find(k, pos + 1)) {
      if (pos == 0 || !text::is_word_char(lower_text[pos - 1])) return true;
    }
  }
  return false;
}

}  // namespace

bool keyword_relevance(std::string_view text, const std::vector<std::string>& keywords) {
  std::vector<std::string> lower;
  lower.reserve(keywords.size());
  for (const auto& k : keywords) lower.push_back(text::to_lower_ascii(k));
  return contains_at_word_start(text::to_lower_ascii(text), lower);
}

const std::vector<std::string>& default_vaccine_keywords() {
  static const std::vector<std::string> k = text::parse_list(embedded::kVaccineKeywords);
  return k;
}

std::vector<Classification> ConcernClassifier::classify_batch(const std::vector<std::string>& texts, int threads) const {
  std::vector<Classification> out(texts.size());
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads > 0 ? threads : 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = classify(texts[i]);
  return out;
}

StudentConcernClassifier::StudentConcernClassifier(std::shared_ptr<const StudentModel> model, const Taxonomy& taxonomy)
    : model_(std::move(model)) {
  if (model_->task != StudentTask::multilabel) {
    throw ValidationError("wrong_task", "a multilabel model is required for concern classification");
  }
  model_->check_taxonomy(taxonomy);
}

Classification StudentConcernClassifier::classify(std::string_view text) const {
  Classification c;
  c.scores = model_->scores(text);
  c.labels = LabelVector(c.scores.size());
  for (std::size_t i = 0; i < c.scores.size(); ++i) c.labels.set(i, c.scores[i] >= model_->thresholds[i]);
  return c;
}

std::vector<Classification> StudentConcernClassifier::classify_batch(const std::vector<std::string>& texts,
                                                                     int threads) const {
  const std::size_t L = model_->num_labels();
  const auto scores = threads == 1 ? kernels::score_batch_serial(*model_, texts)
                                   : kernels::score_batch_parallel(*model_, texts, threads);
  std::vector<Classification> out(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out[i].scores.assign(scores.begin() + i * L, scores.begin() + (i + 1) * L);
    out[i].labels = LabelVector(L);
    for (std::size_t c = 0; c < L; ++c) out[i].labels.set(c, out[i].scores[c] >= model_->thresholds[c]);
  }
  return out;
}

CueRuleClassifier::CueRuleClassifier(const Taxonomy& taxonomy, std::map<std::string, std::vector<std::string>> cues)
    : taxonomy_(taxonomy), cues_(taxonomy.size()) {
  for (auto& [id, words] : cues) {
    auto& slot = cues_[taxonomy_.require_index(id)];
    for (auto& w : words) slot.push_back(text::to_lower_ascii(w));
  }
}

Classification CueRuleClassifier::classify(std::string_view text) const {
  const std::string lower = text::to_lower_ascii(text);
  LabelVector v(taxonomy_.size());
  for (std::size_t i = 0; i < cues_.size(); ++i) {
    if (!cues_[i].empty() && contains_at_word_start(lower, cues_[i])) v.set(i);
  }
  v = hierarchy_closure(v, taxonomy_);
  Classification c;
  c.scores.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) c.scores[i] = v[i] ? 1.0 : 0.0;
  c.labels = std::move(v);
  return c;
}

KeywordRelevanceClassifier::KeywordRelevanceClassifier(std::vector<std::string> keywords)
    : keywords_(std::move(keywords)) {
  if (keywords_.empty()) throw ValidationError("empty_keywords", "keyword list is empty");
  for (auto& k : keywords_) k = text::to_lower_ascii(k);
}

StudentRelevanceClassifier::StudentRelevanceClassifier(std::shared_ptr<const StudentModel> model)
    : model_(std::move(model)) {
  if (model_->task != StudentTask::relevance || model_->num_labels() != 1) {
    throw ValidationError("wrong_task", "a relevance model is required");
  }
}

bool StudentRelevanceClassifier::is_relevant(std::string_view text) const { return model_->predict(text)[0]; }

}  // namespace concernkit
