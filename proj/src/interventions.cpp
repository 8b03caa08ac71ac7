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

#include "concernkit/interventions.hpp"

#include <algorithm>
#include <unordered_set>

namespace concernkit {

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

InterventionStore::InterventionStore(std::vector<InterventionDoc> docs, const Taxonomy& taxonomy)
    : docs_(std::move(docs)) {
  std::unordered_set<std::string> seen;
  for (auto& d : docs_) {
    if (d.id.empty()) throw ValidationError("invalid_intervention", "intervention without id");
    if (!seen.insert(d.id).second) throw ValidationError("duplicate_id", "duplicate intervention id '" + d.id + "'");
    if (d.labels.empty()) throw ValidationError("invalid_intervention", "intervention '" + d.id + "' has no labels");
    // canonical, de-duplicated label order; throws on unknown ids
    d.labels = label_set(labels_from_ids(d.labels, taxonomy), taxonomy);
  }
}

InterventionStore load_interventions(std::istream& in, const Taxonomy& taxonomy) {
  std::vector<InterventionDoc> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      InterventionDoc d;
      d.id = j.at("id").get<std::string>();
      d.title = j.value("title", "");
      const std::string audience = j.value("audience", "patient");
      if (audience != "patient" && audience != "expert") {
        throw ValidationError("invalid_intervention", "audience must be 'patient' or 'expert'");
      }
      d.audience = audience == "expert" ? Audience::expert : Audience::patient;
      d.url = j.value("url", "");
      d.body = j.value("body", "");
      d.labels = j.at("labels").get<std::vector<std::string>>();
      docs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("interventions line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw ValidationError(e.code(), "interventions line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return InterventionStore(std::move(docs), taxonomy);
}

nlohmann::ordered_json intervention_to_json(const InterventionDoc& d) {
  nlohmann::ordered_json j{{"id", d.id},
                           {"title", d.title},
                           {"audience", d.audience == Audience::expert ? "expert" : "patient"},
                           {"url", d.url},
                           {"body", d.body},
                           {"labels", d.labels}};
  return j;
}

std::vector<InterventionMatch> match_interventions(const LabelVector& query, const Taxonomy& taxonomy,
                                                   const InterventionStore& store, std::size_t top_k) {
  if (top_k < 1) throw ValidationError("invalid_argument", "top_k must be >= 1");
  if (query.size() != taxonomy.size()) throw ValidationError("length_mismatch", "query width differs from taxonomy");
  if (!query.any()) throw NoConcernsError();
  if (store.empty()) throw ValidationError("empty_store", "intervention store is empty");

  const auto ids = label_set(query, taxonomy);
  const std::set<std::string> q(ids.begin(), ids.end());
  std::vector<InterventionMatch> out;
  out.reserve(store.size());
  for (const auto& d : store.docs()) {
    out.push_back({&d, jaccard(q, std::set<std::string>(d.labels.begin(), d.labels.end()))});
  }
  auto order = [](const InterventionMatch& a, const InterventionMatch& b) {
    return a.score != b.score ? a.score > b.score : a.doc->id < b.doc->id;
  };
  const std::size_t k = std::min(top_k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k), out.end(), order);
  out.resize(k);
  return out;
}

ClassifyAndMatchResult classify_and_match(std::string_view text, const ConcernClassifier& model,
                                          const Taxonomy& taxonomy, const InterventionStore& store,
                                          std::size_t top_k) {
  ClassifyAndMatchResult r;
  r.classification = model.classify(text);
  r.concerns = label_set(r.classification.labels, taxonomy);
  if (r.concerns.empty()) {
    r.no_concerns = true;
    return r;
  }
  r.matches = match_interventions(r.classification.labels, taxonomy, store, top_k);
  return r;
}

nlohmann::ordered_json classify_and_match_to_json(const ClassifyAndMatchResult& r, const Taxonomy& taxonomy) {
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < taxonomy.size() && c < r.classification.scores.size(); ++c) {
    scores[taxonomy.node(c).id] = r.classification.scores[c];
  }
  nlohmann::ordered_json matches = nlohmann::ordered_json::array();
  for (const auto& m : r.matches) {
    auto j = intervention_to_json(*m.doc);
    j["score"] = m.score;
    matches.push_back(std::move(j));
  }
  return {{"concerns", r.concerns},
          {"labels", labels_to_json(r.classification.labels, taxonomy)},
          {"scores", scores},
          {"no_concerns", r.no_concerns},
          {"matches", matches}};
}

}  // namespace concernkit
