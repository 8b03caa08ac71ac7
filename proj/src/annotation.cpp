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

#include "concernkit/annotation.hpp"

#include <algorithm>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include "concernkit/hash.hpp"

namespace concernkit {

namespace {
constexpr std::string_view kCacheCollection = "teacher_cache";
}

std::string_view to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::teacher: return "teacher";
    case Provenance::human: return "human";
    case Provenance::student: return "student";
  }
  return "teacher";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "teacher") return Provenance::teacher;
  if (s == "human") return Provenance::human;
  if (s == "student") return Provenance::student;
  throw ValidationError("invalid_provenance", "unknown provenance '" + std::string(s) + "'");
}

std::string_view to_string(AnnotationTask t) noexcept {
  return t == AnnotationTask::relevance ? "relevance" : "multilabel";
}

AnnotationTask annotation_task_from_string(std::string_view s) {
  if (s == "relevance") return AnnotationTask::relevance;
  if (s == "multilabel") return AnnotationTask::multilabel;
  throw ValidationError("invalid_task", "unknown annotation task '" + std::string(s) + "'");
}

nlohmann::ordered_json annotation_to_json(const AnnotationRecord& r, AnnotationTask task, const Taxonomy& t) {
  nlohmann::ordered_json j;
  j["passage_id"] = r.passage_id;
  if (task == AnnotationTask::relevance) {
    j["labels"] = {{"relevant", (!r.labels.empty() && r.labels[0]) ? 1 : 0}};
  } else {
    j["labels"] = labels_to_json(r.labels, t);
  }
  j["provenance"] = to_string(r.provenance);
  j["valid"] = r.valid;
  j["raw_response"] = r.raw_response ? nlohmann::ordered_json(*r.raw_response) : nlohmann::ordered_json(nullptr);
  j["retries_used"] = r.retries_used;
  return j;
}

AnnotationRecord annotation_from_json(const nlohmann::json& j, AnnotationTask task, const Taxonomy& t) {
  if (!j.is_object() || !j.contains("passage_id") || !j.contains("labels")) {
    throw FormatError("annotation needs 'passage_id' and 'labels'");
  }
  AnnotationRecord r;
  try {
    r.passage_id = j.at("passage_id").get<std::string>();
    if (task == AnnotationTask::relevance) {
      const auto& v = j.at("labels").at("relevant");
      const int x = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
      if (x != 0 && x != 1) throw FormatError("'relevant' must be 0 or 1");
      r.labels = LabelVector(std::vector<std::uint8_t>{static_cast<std::uint8_t>(x)});
    } else {
      r.labels = labels_from_json(j.at("labels"), t);
    }
    if (j.contains("provenance")) r.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    if (j.contains("valid")) r.valid = j.at("valid").get<bool>();
    if (j.contains("raw_response") && j["raw_response"].is_string()) r.raw_response = j["raw_response"].get<std::string>();
    if (j.contains("retries_used")) r.retries_used = j.at("retries_used").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed annotation: ") + e.what());
  }
  return r;
}

std::vector<AnnotationRecord> read_annotations(std::istream& in, AnnotationTask task, const Taxonomy& t) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(annotation_from_json(nlohmann::json::parse(line), task, t));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("annotations line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError(e.code(), "annotations line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_annotations(std::ostream& out, const std::vector<AnnotationRecord>& records, AnnotationTask task,
                       const Taxonomy& t) {
  for (const auto& r : records) out << annotation_to_json(r, task, t).dump() << '\n';
}

std::string AnnotationCache::key(std::string_view prompt, std::string_view model_name) {
  std::string material(prompt);
  material.push_back('\x1f');
  material += model_name;
  return sha256_hex(material);
}

std::optional<std::string> AnnotationCache::get(const std::string& key) {
  std::optional<nlohmann::json> rec;
  {
    std::shared_lock lock(mutex_);
    try {
      rec = store_.get_record(kCacheCollection, key);
    } catch (const IntegrityError&) {
      rec.reset();  // torn or corrupted entry: recompute
    }
  }
  if (!rec || !rec->contains("response") || !(*rec)["response"].is_string()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return (*rec)["response"].get<std::string>();
}

void AnnotationCache::put(const std::string& key, std::string_view model_name, std::string_view response) {
  nlohmann::json j{{"model", model_name}, {"response", response}};
  std::unique_lock lock(mutex_);
  store_.put_record(kCacheCollection, key, j);
}

namespace {

enum class Outcome { ok, parse_failed, transport_failed, invalid_input };

struct PassageResult {
  AnnotationRecord record;
  Outcome outcome = Outcome::ok;
  bool cache_hit = false;
  std::size_t calls = 0;
  std::size_t transport_errors = 0;
  std::size_t parse_errors = 0;
};

LabelVector parse_for_task(const std::string& raw, AnnotationTask task, const Taxonomy& t) {
  if (task == AnnotationTask::relevance) {
    return LabelVector(std::vector<std::uint8_t>{static_cast<std::uint8_t>(parse_relevance_response(raw) ? 1 : 0)});
  }
  return parse_multilabel_response(raw, t);
}

PassageResult annotate_one(const Passage& p, const Taxonomy& t, TeacherClient& teacher, const TeacherConfig& cfg,
                           AnnotationCache* cache, AnnotationTask task) {
  PassageResult res;
  res.record.passage_id = p.passage_id;
  const std::size_t width = task == AnnotationTask::relevance ? 1 : t.size();
  res.record.labels = LabelVector(width);

  std::string prompt;
  try {
    prompt = task == AnnotationTask::relevance ? build_relevance_prompt(p.text)
                                               : build_multilabel_prompt(p.text, t, PromptMode::all_in_one());
  } catch (const ValidationError&) {
    res.record.valid = false;
    res.outcome = Outcome::invalid_input;
    return res;
  }

  const std::string model = teacher.model_name();
  const std::string key = AnnotationCache::key(prompt, model);
  if (cache) {
    if (auto hit = cache->get(key)) {
      try {
        res.record.labels = parse_for_task(*hit, task, t);
        res.record.raw_response = std::move(*hit);
        res.cache_hit = true;
        return res;
      } catch (const UnparseableResponse&) {
        // only parseable responses are cached; fall through and re-ask
      }
    }
  }

  bool last_was_transport = false;
  for (int attempt = 0; attempt <= cfg.retry_limit; ++attempt) {
    if (attempt > 0) {
      res.record.retries_used = attempt;
      std::this_thread::sleep_for(cfg.backoff_base * (1LL << std::min(attempt - 1, 16)));
    }
    std::string raw;
    try {
      ++res.calls;
      raw = teacher.complete(prompt);
    } catch (const std::exception&) {
      ++res.transport_errors;
      last_was_transport = true;
      continue;
    }
    try {
      res.record.labels = parse_for_task(raw, task, t);
    } catch (const UnparseableResponse&) {
      ++res.parse_errors;
      last_was_transport = false;
      res.record.raw_response = raw;
      continue;
    }
    if (cache) cache->put(key, model, raw);
    res.record.raw_response = std::move(raw);
    return res;
  }
  res.record.labels = LabelVector(width);
  res.record.valid = false;
  res.outcome = (last_was_transport && res.parse_errors == 0) ? Outcome::transport_failed : Outcome::parse_failed;
  return res;
}

}  // namespace

std::vector<AnnotationRecord> annotate_corpus(std::span<const Passage> passages, const Taxonomy& t,
                                              TeacherClient& teacher, const TeacherConfig& cfg,
                                              AnnotationCache* cache, const AnnotateOptions& options,
                                              AnnotationReport* report) {
  cfg.validate();
  const std::size_t n = passages.size();
  std::vector<PassageResult> results(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      results[i] = annotate_one(passages[i], t, teacher, cfg, cache, options.task);
      const std::size_t d = done.fetch_add(1) + 1;
      if (options.progress) options.progress(d, n);
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_parallel), n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  AnnotationReport rep;
  rep.total = n;
  std::size_t transport_failed = 0;
  std::vector<AnnotationRecord> out;
  out.reserve(n);
  for (auto& r : results) {
    if (r.record.valid) {
      ++rep.valid;
    } else {
      ++rep.invalid;
      rep.invalid_passages.push_back(r.record.passage_id);
    }
    if (r.outcome == Outcome::transport_failed) ++transport_failed;
    rep.cache_hits += r.cache_hit ? 1 : 0;
    rep.teacher_calls += r.calls;
    rep.transport_errors += r.transport_errors;
    rep.parse_errors += r.parse_errors;
    out.push_back(std::move(r.record));
  }
  if (report) *report = rep;
  if (n > 0 && transport_failed == n) {
    throw TeacherUnreachableError("teacher unreachable: all " + std::to_string(n) +
                                  " passages failed after retries");
  }
  return out;
}

std::vector<std::vector<double>> sample_individual_fractions(std::span<const Passage> passages, const Taxonomy& t,
                                                             TeacherClient& teacher, int samples_per_label) {
  if (samples_per_label < 1) throw ValidationError("invalid_argument", "samples_per_label must be >= 1");
  std::vector<std::vector<double>> out(passages.size(), std::vector<double>(t.size(), 0.0));
  for (std::size_t i = 0; i < passages.size(); ++i) {
    for (std::size_t c = 0; c < t.size(); ++c) {
      const std::string& id = t.node(c).id;
      const std::string prompt = build_multilabel_prompt(passages[i].text, t, PromptMode::individual(id));
      int positives = 0;
      for (int s = 0; s < samples_per_label; ++s) {
        try {
          if (parse_single_label_response(teacher.complete(prompt), t, id)) ++positives;
        } catch (const UnparseableResponse&) {
        } catch (const TeacherError&) {
        }
      }
      out[i][c] = static_cast<double>(positives) / samples_per_label;
    }
  }
  return out;
}

ThresholdSelection individual_threshold(int samples_per_label, const std::vector<std::vector<double>>& fractions,
                                        const std::vector<LabelVector>& gold) {
  if (samples_per_label < 1) throw ValidationError("invalid_argument", "samples_per_label must be >= 1");
  return best_f1_thresholds(fractions, gold, /*include_half=*/false);
}

std::vector<Passage> relevance_filter_pipeline(std::span<const Passage> passages,
                                               const std::function<bool(const std::string&)>& is_relevant) {
  std::vector<Passage> out;
  for (const auto& p : passages) {
    if (is_relevant(p.text)) out.push_back(p);
  }
  return out;
}

}  // namespace concernkit
