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

#include "concernkit/pipeline.hpp"

#include <algorithm>

#include "concernkit/error.hpp"

namespace concernkit {

ClassifiedDocument classify_document(const Document& doc, const ConcernClassifier& model, std::size_t num_labels,
                                     int threads) {
  ClassifiedDocument d;
  d.doc_id = doc.doc_id;
  d.source = doc.source;
  d.url = doc.url;
  d.published_at = doc.published_at;
  std::vector<std::string> texts;
  for (const auto& p : doc.passages) texts.push_back(p.text);
  auto results = model.classify_batch(texts, threads);
  std::vector<LabelVector> labels;
  for (std::size_t i = 0; i < doc.passages.size(); ++i) {
    labels.push_back(results[i].labels);
    d.passages.push_back({doc.passages[i], std::move(results[i])});
  }
  d.labels = labels.empty() ? LabelVector(num_labels) : aggregate_article(labels);
  return d;
}

bool article_invariant_holds(const ClassifiedDocument& d) {
  LabelVector expect(d.labels.size());
  for (const auto& p : d.passages) {
    if (p.result.labels.size() != expect.size()) return false;
    for (std::size_t c = 0; c < expect.size(); ++c) {
      if (p.result.labels[c]) expect.set(c);
    }
  }
  return expect == d.labels;
}

nlohmann::ordered_json classified_document_to_json(const ClassifiedDocument& d, const Taxonomy& t) {
  nlohmann::ordered_json j;
  j["doc_id"] = d.doc_id;
  j["source"] = to_string(d.source);
  j["url"] = d.url ? nlohmann::ordered_json(*d.url) : nlohmann::ordered_json(nullptr);
  j["published_at"] = d.published_at ? nlohmann::ordered_json(d.published_at->to_string()) : nlohmann::ordered_json(nullptr);
  j["labels"] = labels_to_json(d.labels, t);
  j["concerns"] = label_set(d.labels, t);
  nlohmann::ordered_json ps = nlohmann::ordered_json::array();
  for (const auto& p : d.passages) {
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < t.size() && c < p.result.scores.size(); ++c) scores[t.node(c).id] = p.result.scores[c];
    ps.push_back({{"passage_id", p.passage.passage_id},
                  {"start", p.passage.start},
                  {"end", p.passage.end},
                  {"text", p.passage.text},
                  {"labels", labels_to_json(p.result.labels, t)},
                  {"scores", scores}});
  }
  j["passages"] = std::move(ps);
  return j;
}

ClassifiedDocument classified_document_from_json(const nlohmann::json& j, const Taxonomy& t) {
  ClassifiedDocument d;
  try {
    d.doc_id = j.at("doc_id").get<std::string>();
    d.source = source_kind_from_string(j.value("source", "text"));
    if (j.contains("url") && j["url"].is_string()) d.url = j["url"].get<std::string>();
    if (j.contains("published_at") && j["published_at"].is_string()) {
      d.published_at = Date::parse(j["published_at"].get<std::string>());
      if (!d.published_at) throw FormatError("invalid published_at in " + d.doc_id);
    }
    d.labels = labels_from_json(j.at("labels"), t);
    for (const auto& p : j.at("passages")) {
      ClassifiedPassage cp;
      cp.passage.passage_id = p.at("passage_id").get<std::string>();
      cp.passage.doc_id = d.doc_id;
      cp.passage.start = p.at("start").get<std::size_t>();
      cp.passage.end = p.at("end").get<std::size_t>();
      cp.passage.text = p.at("text").get<std::string>();
      cp.result.labels = labels_from_json(p.at("labels"), t);
      cp.result.scores.assign(t.size(), 0.0);
      if (p.contains("scores")) {
        for (auto it = p["scores"].begin(); it != p["scores"].end(); ++it) {
          cp.result.scores[t.require_index(it.key())] = it.value().get<double>();
        }
      }
      d.passages.push_back(std::move(cp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed classified document: ") + e.what());
  }
  return d;
}

std::vector<ArticleLabel> articles_for_trends(const std::vector<ClassifiedDocument>& docs) {
  std::vector<ArticleLabel> out;
  for (const auto& d : docs) {
    if (d.published_at) out.push_back({d.doc_id, *d.published_at, d.labels});
  }
  std::stable_sort(out.begin(), out.end(), [](const ArticleLabel& a, const ArticleLabel& b) {
    return a.date != b.date ? a.date < b.date : a.doc_id < b.doc_id;
  });
  return out;
}

std::map<std::string, LabelVector> read_passage_labels(std::istream& in, const Taxonomy& t) {
  std::map<std::string, LabelVector> out;
  std::string line;
  std::size_t lineno = 0;
  auto add = [&](const std::string& id, LabelVector v) {
    if (!out.emplace(id, std::move(v)).second) {
      throw FormatError("duplicate_passage", "line " + std::to_string(lineno) + ": duplicate passage '" + id + "'");
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("passages")) {
      for (const auto& p : classified_document_from_json(j, t).passages) add(p.passage.passage_id, p.result.labels);
    } else if (j.contains("passage_id") && j.contains("labels")) {
      if (j.contains("valid") && j["valid"].is_boolean() && !j["valid"].get<bool>()) continue;
      add(j["passage_id"].get<std::string>(), labels_from_json(j["labels"], t));
    } else {
      throw FormatError("line " + std::to_string(lineno) + ": expected an annotation or a classified document");
    }
  }
  return out;
}

}  // namespace concernkit
