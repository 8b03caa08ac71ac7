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

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "concernkit/analytics.hpp"
#include "concernkit/classifier.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/taxonomy.hpp"
#include "json.hpp"

namespace concernkit {

struct ClassifiedPassage {
  Passage passage;
  Classification result;
};

struct ClassifiedDocument {
  std::string doc_id;
  SourceKind source = SourceKind::text;
  std::optional<std::string> url;
  std::optional<Date> published_at;
  std::vector<ClassifiedPassage> passages;
  LabelVector labels;  // aggregate_article over passages
};

/// Classifies every passage and aggregates. A document without passages gets all-zero labels.
ClassifiedDocument classify_document(const Document& doc, const ConcernClassifier& model, std::size_t num_labels,
                                     int threads = 1);

/// Article labels equal the OR of passage labels.
bool article_invariant_holds(const ClassifiedDocument& d);

/// {"doc_id","source","url","published_at","labels":{id:0/1},"concerns":[ids],
///  "passages":[{"passage_id","start","end","text","labels","scores"}]}
nlohmann::ordered_json classified_document_to_json(const ClassifiedDocument& d, const Taxonomy& t);
ClassifiedDocument classified_document_from_json(const nlohmann::json& j, const Taxonomy& t);

/// Dated documents as trend input, ordered by (date, doc_id). Undated documents are skipped.
std::vector<ArticleLabel> articles_for_trends(const std::vector<ClassifiedDocument>& docs);

/// passage_id -> labels from JSONL holding either annotation lines
/// ({"passage_id","labels"}) or classified documents (with "passages").
std::map<std::string, LabelVector> read_passage_labels(std::istream& in, const Taxonomy& t);

}  // namespace concernkit
