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

#include "concernkit/synthetic.hpp"

#include <algorithm>
#include <random>

#include "concernkit/classifier.hpp"
#include "concernkit/hash.hpp"

namespace concernkit {

namespace {

// Deterministic across standard libraries (std:: distributions are not).
struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  std::size_t pick(std::size_t n) { return static_cast<std::size_t>(gen() % n); }
  template <typename T>
  const T& choice(const std::vector<T>& v) { return v[pick(v.size())]; }
};

const std::vector<std::string> kCueTemplates = {
    "People keep bringing up {} in these threads.",
    "The post was mostly about {} and little else.",
    "Several readers wrote that {} worried them.",
    "Her main point was {}, repeated twice.",
    "Comments below the article focused on {}.",
};

const std::vector<std::string> kVaccineSentences = {
    "The vaccine clinic opened early on Monday.",
    "Officials discussed the vaccination campaign at the town hall.",
    "A booster appointment was scheduled for next week.",
    "The school sent a note about immunization records.",
    "Parents asked whether the jab was required for camp.",
    "A nurse answered questions about the vaccines on offer.",
};

const std::vector<std::string> kFillerSentences = {
    "The weather was cold and grey all afternoon.",
    "A neighbor walked the dog along the river path.",
    "Traffic on the bridge slowed during the morning commute.",
    "The library extended its opening hours this month.",
    "Local bakers sold bread at the market square.",
    "The football match ended with a late goal.",
    "Students painted a mural near the train station.",
    "A new cafe opened beside the old cinema.",
    "The council repaired potholes on the main street.",
    "Gardeners planted tulips around the fountain.",
};

const std::vector<std::string> kDistractorTemplates = {
    "The new highway ramp looks {} to some drivers.",
    "A cooking blog wrote about {} in pastry dough.",
    "The chess club debated {} for an hour.",
    "An art review mentioned {} in passing.",
};

std::string fill(const std::string& tmpl, const std::string& word) {
  std::string out = tmpl;
  out.replace(out.find("{}"), 2, word);
  return out;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

}  // namespace

const std::map<std::string, std::vector<std::string>>& synthetic_cues() {
  static const std::map<std::string, std::vector<std::string>> cues = {
      {"1", {"research"}},
      {"1.1", {"understudied", "insufficient", "rushed"}},
      {"1.2", {"flawed", "biased", "sloppy"}},
      {"1.3", {"fallible", "overturned", "retracted"}},
      {"2", {"pointless"}},
      {"2.1", {"homeopathy", "vitamins", "herbal"}},
      {"2.2", {"harmless", "mild"}},
      {"2.3", {"ineffective", "useless"}},
      {"2.4", {"waning", "shortlived"}},
      {"2.5", {"eradicated", "vanished"}},
      {"3", {"dangerous"}},
      {"3.1", {"thimerosal", "aluminum", "formaldehyde"}},
      {"3.2", {"autism", "myocarditis", "seizures"}},
      {"3.3", {"infertility", "sterility"}},
      {"3.4", {"overloaded", "overwhelm"}},
      {"3.5", {"longterm", "decades"}},
      {"4", {"freedom"}},
      {"4.1", {"religious", "sinful", "faith"}},
      {"4.2", {"mandate", "coerced"}},
      {"5", {"distrust"}},
      {"5.1", {"conspiracy", "coverup", "depopulation"}},
      {"5.2", {"pharma", "profits", "greedy"}},
      {"5.3", {"government", "bureaucrats"}},
      {"5.4", {"kickbacks", "bribed"}},
  };
  return cues;
}

std::vector<SyntheticPassage> generate_synthetic(const Taxonomy& taxonomy, const SyntheticConfig& config) {
  const auto& cues = synthetic_cues();
  const std::size_t rare = taxonomy.require_index(config.rare_label);
  std::vector<std::size_t> children, parents;
  for (std::size_t i = 0; i < taxonomy.size(); ++i) {
    if (!cues.contains(taxonomy.node(i).id)) continue;
    if (taxonomy.node(i).is_parent()) parents.push_back(i);
    else if (i != rare) children.push_back(i);
  }
  if (children.empty()) throw ValidationError("invalid_taxonomy", "synthetic generator needs child nodes with cues");

  Rng rng(config.seed);
  std::vector<SyntheticPassage> out;
  out.reserve(config.count);
  for (std::size_t n = 0; n < config.count; ++n) {
    SyntheticPassage p;
    p.id = config.id_prefix + "-" + std::to_string(n);
    p.labels = LabelVector(taxonomy.size());
    std::vector<std::string> sentences;
    const double u = rng.uniform();
    if (u < config.irrelevant_rate) {
      p.relevant = false;
      for (int k = 0; k < 3; ++k) sentences.push_back(rng.choice(kFillerSentences));
      if (rng.uniform() < config.distractor_rate) {
        const auto& node = taxonomy.node(children[rng.pick(children.size())]);
        sentences.push_back(fill(rng.choice(kDistractorTemplates), rng.choice(cues.at(node.id))));
      }
    } else {
      sentences.push_back(rng.choice(kVaccineSentences));
      sentences.push_back(rng.choice(kFillerSentences));
      if (u >= config.irrelevant_rate + config.relevant_no_concern_rate) {
        std::vector<std::size_t> chosen;
        const double r = rng.uniform();
        const std::size_t k = r < 0.5 ? 1 : (r < 0.85 ? 2 : 3);
        while (chosen.size() < k) {
          const std::size_t c = children[rng.pick(children.size())];
          if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
        }
        if (rng.uniform() < config.rare_rate) chosen.push_back(rare);
        if (rng.uniform() < config.parent_only_rate) chosen.push_back(parents[rng.pick(parents.size())]);
        for (std::size_t c : chosen) {
          p.labels.set(c);
          sentences.push_back(fill(rng.choice(kCueTemplates), rng.choice(cues.at(taxonomy.node(c).id))));
        }
        p.labels = hierarchy_closure(p.labels, taxonomy);
      }
    }
    for (std::size_t i = sentences.size(); i > 1; --i) std::swap(sentences[i - 1], sentences[rng.pick(i)]);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (i) p.text += ' ';
      p.text += capitalize(sentences[i]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

SyntheticCorpus synthetic_corpus(const Taxonomy& taxonomy, const SyntheticConfig& config, Date start) {
  SyntheticCorpus corpus;
  auto passages = generate_synthetic(taxonomy, config);
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t i = 0, doc_index = 0;
  while (i < passages.size()) {
    const std::size_t k = std::min<std::size_t>(1 + rng.pick(3), passages.size() - i);
    std::string raw;
    for (std::size_t j = 0; j < k; ++j) {
      if (j) raw += "\n\n";
      raw += passages[i + j].text;
    }
    DocumentMeta meta;
    meta.id = config.id_prefix + "-doc-" + std::to_string(doc_index);
    meta.date = start + static_cast<std::int64_t>(doc_index);
    Document doc = ingest_text(std::move(raw), meta);
    if (doc.passages.size() != k) throw Error("internal_error", "synthetic document segmented unexpectedly");
    for (std::size_t j = 0; j < k; ++j) {
      passages[i + j].id = doc.passages[j].passage_id;
      corpus.passages.push_back(std::move(passages[i + j]));
    }
    corpus.documents.push_back(std::move(doc));
    i += k;
    ++doc_index;
  }
  return corpus;
}

std::unique_ptr<ScriptedTeacher> make_rule_teacher(const Taxonomy& taxonomy, double flip_rate) {
  auto rules = std::make_shared<CueRuleClassifier>(taxonomy, synthetic_cues());
  const std::string probe = build_relevance_prompt("x");
  const std::string relevance_preamble = probe.substr(0, probe.size() - 1);
  const std::string individual_marker = "please only return for the " + taxonomy.label_prefix() + "_";
  return std::make_unique<ScriptedTeacher>(
      [rules, taxonomy, relevance_preamble, individual_marker, flip_rate](const std::string& prompt,
                                                                          std::size_t) -> std::string {
        const auto passage = extract_prompt_passage(prompt);
        if (!passage) return "I cannot help with that.";
        if (prompt.starts_with(relevance_preamble)) {
          return keyword_relevance(*passage, default_vaccine_keywords()) ? "Yes" : "No";
        }
        LabelVector labels = rules->classify(*passage).labels;
        if (flip_rate > 0.0) {
          const auto d = sha256(prompt);
          Rng rng(std::uint64_t{d[0]} | std::uint64_t{d[1]} << 8 | std::uint64_t{d[2]} << 16 | std::uint64_t{d[3]} << 24);
          for (std::size_t c = 0; c < labels.size(); ++c) {
            if (rng.uniform() < flip_rate) labels.set(c, !labels[c]);
          }
        }
        if (const auto pos = prompt.rfind(individual_marker); pos != std::string::npos) {
          const auto start = pos + individual_marker.size();
          const std::string id = prompt.substr(start, prompt.find(' ', start) - start);
          const auto idx = taxonomy.index_of(id);
          if (!idx) return "Unknown label.";
          return taxonomy.label_prefix() + "_" + id + ": " + (labels[*idx] ? "1" : "0");
        }
        return format_multilabel_response(labels, taxonomy);
      });
}

}  // namespace concernkit
