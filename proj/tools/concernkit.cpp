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

// concernkit: batch CLI over the library.

#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>

#include "CLI11.hpp"
#include "concernkit/analytics.hpp"
#include "concernkit/annotation.hpp"
#include "concernkit/classifier.hpp"
#include "concernkit/evaluation.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/interventions.hpp"
#include "concernkit/kernels.hpp"
#include "concernkit/pipeline.hpp"
#include "concernkit/service.hpp"
#include "concernkit/student.hpp"
#include "concernkit/synthetic.hpp"

using namespace concernkit;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

// Writes to a temp file and renames on commit, so failed runs leave no partial output.
class OutFile {
 public:
  explicit OutFile(std::string path) : path_(std::move(path)) {}
  std::ostream& stream() { return buf_; }
  void commit() {
    if (path_.empty() || path_ == "-") {
      std::cout << buf_.str();
      std::cout.flush();
    } else {
      write_file_atomic(path_, buf_.str());
    }
  }

 private:
  std::string path_;
  std::ostringstream buf_;
};

Taxonomy active_taxonomy(const std::string& path) { return path.empty() ? default_taxonomy() : load_taxonomy_file(path); }

std::vector<Passage> corpus_passages(const std::vector<Document>& docs) {
  std::vector<Passage> out;
  for (const auto& d : docs) out.insert(out.end(), d.passages.begin(), d.passages.end());
  return out;
}

std::vector<ClassifiedDocument> read_classified(const std::string& path, const Taxonomy& t) {
  auto in = open_in(path);
  std::vector<ClassifiedDocument> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(classified_document_from_json(nlohmann::json::parse(line), t));
  }
  return out;
}

std::map<std::string, bool> read_relevance(const std::string& path, const Taxonomy& t) {
  auto in = open_in(path);
  std::map<std::string, bool> out;
  for (const auto& r : read_annotations(in, AnnotationTask::relevance, t)) {
    if (r.valid) out[r.passage_id] = r.labels[0];
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"concernkit - concern classification pipeline"};
  app.require_subcommand(1);
  std::string taxonomy_path;
  app.add_option("--taxonomy", taxonomy_path, "Taxonomy JSON (default: bundled)")->check(CLI::ExistingFile);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Segment a jsonl/csv/plain file into a corpus");
  std::string ing_in, ing_format = "jsonl", ing_out;
  std::size_t ing_max_len = kDefaultMaxPassageLen;
  ingest->add_option("file", ing_in, "Input file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--format", ing_format, "jsonl|csv|plain")->check(CLI::IsMember({"jsonl", "csv", "plain"}));
  ingest->add_option("--out", ing_out, "Corpus JSONL output")->required();
  ingest->add_option("--max-len", ing_max_len, "Maximum passage length in bytes")->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a seeded synthetic corpus and gold labels");
  SyntheticConfig syn_cfg;
  std::string syn_out, syn_gold, syn_start = "2020-01-01";
  synth->add_option("--count", syn_cfg.count, "Number of passages")->check(CLI::PositiveNumber);
  synth->add_option("--seed", syn_cfg.seed, "Random seed");
  synth->add_option("--irrelevant-rate", syn_cfg.irrelevant_rate, "Fraction of off-topic passages")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--no-concern-rate", syn_cfg.relevant_no_concern_rate, "Fraction of on-topic passages without concerns")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--start-date", syn_start, "Date of the first document");
  synth->add_option("--out", syn_out, "Corpus JSONL output")->required();
  synth->add_option("--gold", syn_gold, "Gold multilabel annotations JSONL output");

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Label passages with the teacher");
  std::string ann_mode = "multilabel", ann_teacher = "mock", ann_in, ann_out, ann_cache;
  TeacherConfig teacher_cfg;
  annotate->add_option("--mode", ann_mode, "relevance|multilabel")->check(CLI::IsMember({"relevance", "multilabel"}));
  annotate->add_option("--teacher", ann_teacher, "mock|http")->check(CLI::IsMember({"mock", "http"}));
  annotate->add_option("--in", ann_in, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  annotate->add_option("--out", ann_out, "Annotations JSONL output")->required();
  annotate->add_option("--cache-dir", ann_cache, "Data directory for the response cache");
  annotate->add_option("--endpoint", teacher_cfg.endpoint, "Chat-completions URL (http teacher)");
  annotate->add_option("--teacher-model", teacher_cfg.model_name, "Teacher model name");
  annotate->add_option("--max-parallel", teacher_cfg.max_parallel, "Concurrent teacher requests")->check(CLI::PositiveNumber);
  annotate->add_option("--retries", teacher_cfg.retry_limit, "Retries per passage")->check(CLI::NonNegativeNumber);

  // train
  auto* train = app.add_subcommand("train", "Train a student model from annotations");
  std::string tr_task = "multilabel", tr_corpus, tr_ann, tr_out, tr_scheme = "baseline";
  TrainConfig tcfg;
  FeaturizerConfig fcfg;
  int hash_bits = 18;
  double calib_fraction = 0.1;
  train->add_option("--task", tr_task, "relevance|multilabel")->check(CLI::IsMember({"relevance", "multilabel"}));
  train->add_option("--corpus", tr_corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--annotations", tr_ann, "Annotations JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--out", tr_out, "Model output path")->required();
  train->add_option("--scheme", tr_scheme, "baseline|clamp[:k]|no_clamp|log1p");
  train->add_option("--seed", tcfg.seed, "Seed for shuffling and the split");
  train->add_option("--epochs", tcfg.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", tcfg.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--batch", tcfg.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--l2", tcfg.l2)->check(CLI::NonNegativeNumber);
  train->add_option("--hash-bits", hash_bits, "log2 of the hashed feature space")->check(CLI::Range(4, 26));
  train->add_option("--ngram-max", fcfg.ngram_max)->check(CLI::Range(1, 4));
  train->add_flag("--idf", fcfg.use_idf, "Apply idf weighting");
  train->add_option("--calib-fraction", calib_fraction, "Held-out fraction for threshold selection")
      ->check(CLI::Range(0.0, 0.9));

  // classify
  auto* classify = app.add_subcommand("classify", "Classify a corpus with a trained model");
  std::string cl_model, cl_in, cl_out, cl_report;
  int cl_threads = 1;
  classify->add_option("--model", cl_model, "Model file")->required();
  classify->add_option("--in", cl_in, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  classify->add_option("--out", cl_out, "Output JSONL")->required();
  classify->add_option("--threads", cl_threads, "Worker threads (1 = serial)")->check(CLI::PositiveNumber);
  classify->add_option("--report", cl_report, "timing")->check(CLI::IsMember({"timing"}));

  // trend
  auto* trend = app.add_subcommand("trend", "Rolling-average trend series from classified documents");
  std::string tr_in, trend_out, trend_format = "csv";
  RollingOptions ropts;
  trend->add_option("--in", tr_in, "Classified documents JSONL")->required()->check(CLI::ExistingFile);
  trend->add_option("--window", ropts.window, "Window in articles")->check(CLI::PositiveNumber);
  trend->add_flag("--partial", ropts.emit_partial, "Emit warm-up points averaged over the prefix");
  trend->add_option("--format", trend_format)->check(CLI::IsMember({"csv", "json"}));
  trend->add_option("--out", trend_out, "Output path (default stdout)");

  // events
  auto* events = app.add_subcommand("events", "Compare concern prevalence before and after a date");
  std::string ev_in, ev_date, ev_out;
  int pre_days = 30, post_days = 30;
  events->add_option("--in", ev_in, "Classified documents JSONL")->required()->check(CLI::ExistingFile);
  events->add_option("--date", ev_date, "Event date YYYY-MM-DD")->required();
  events->add_option("--pre-days", pre_days)->check(CLI::PositiveNumber);
  events->add_option("--post-days", post_days)->check(CLI::PositiveNumber);
  events->add_option("--out", ev_out, "Output path (default stdout)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against gold labels");
  std::string ev_gold, ev_pred, ev_task = "multilabel", ev_format = "text";
  evaluate->add_option("--gold", ev_gold)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--pred", ev_pred)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--task", ev_task)->check(CLI::IsMember({"relevance", "multilabel"}));
  evaluate->add_option("--format", ev_format)->check(CLI::IsMember({"text", "json", "csv"}));

  // match
  auto* match = app.add_subcommand("match", "Classify a text and rank interventions");
  std::string m_model, m_store, m_text;
  std::size_t m_top_k = 5;
  match->add_option("--model", m_model)->required();
  match->add_option("--interventions", m_store)->required()->check(CLI::ExistingFile);
  match->add_option("--text", m_text)->required();
  match->add_option("--top-k", m_top_k)->check(CLI::PositiveNumber);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  std::string sv_config;
  ServiceConfig scfg;
  serve->add_option("--config", sv_config, "Service config JSON")->check(CLI::ExistingFile);
  auto* port_opt = serve->add_option("--port", scfg.port);
  auto* dir_opt = serve->add_option("--data-dir", scfg.data_dir);
  auto* model_opt = serve->add_option("--model", scfg.model_path);
  auto* iv_opt = serve->add_option("--interventions", scfg.interventions_path);
  auto* workers_opt = serve->add_option("--workers", scfg.workers)->check(CLI::PositiveNumber);
  bool demo_rules = false;
  serve->add_flag("--demo-rules", demo_rules, "Use the synthetic cue-word rules instead of a trained model");

  CLI11_PARSE(app, argc, argv);

  try {
    const Taxonomy tax = active_taxonomy(taxonomy_path);

    if (*ingest) {
      auto in = open_in(ing_in);
      OutFile out(ing_out);
      const auto summary = ingest_stream(
          in, file_format_from_string(ing_format),
          [&](Document&& d) { out.stream() << document_to_json(d).dump() << '\n'; }, ing_max_len);
      out.commit();
      std::cerr << "ingested " << summary.documents << " documents, skipped " << summary.skipped.size() << " records\n";
      for (const auto& s : summary.skipped) std::cerr << "  line " << s.line << ": " << s.reason << '\n';
    } else if (*synth) {
      const auto start = Date::parse(syn_start);
      if (!start) throw ValidationError("invalid_date", "--start-date must be YYYY-MM-DD");
      const auto corpus = synthetic_corpus(tax, syn_cfg, *start);
      OutFile out(syn_out);
      write_corpus(out.stream(), corpus.documents);
      out.commit();
      if (!syn_gold.empty()) {
        OutFile gold(syn_gold);
        for (const auto& p : corpus.passages) {
          AnnotationRecord r{p.id, p.labels, Provenance::human, std::nullopt, true, 0};
          gold.stream() << annotation_to_json(r, AnnotationTask::multilabel, tax).dump() << '\n';
        }
        gold.commit();
      }
      std::cerr << "wrote " << corpus.documents.size() << " documents, " << corpus.passages.size() << " passages\n";
    } else if (*annotate) {
      auto in = open_in(ann_in);
      const auto passages = corpus_passages(read_corpus(in));
      teacher_cfg.apply_environment();
      std::unique_ptr<TeacherClient> teacher;
      if (ann_teacher == "mock") {
        teacher = make_rule_teacher(tax);
      } else {
        if (teacher_cfg.endpoint.empty()) {
          throw ValidationError("invalid_config", "--endpoint or CONCERNKIT_TEACHER_ENDPOINT is required");
        }
        teacher = std::make_unique<HttpTeacherClient>(teacher_cfg);
      }
      std::unique_ptr<DataStore> store;
      std::unique_ptr<AnnotationCache> cache;
      if (!ann_cache.empty()) {
        store = std::make_unique<DataStore>(ann_cache);
        cache = std::make_unique<AnnotationCache>(*store);
      }
      AnnotateOptions opts;
      opts.task = annotation_task_from_string(ann_mode);
      AnnotationReport report;
      const auto records = annotate_corpus(passages, tax, *teacher, teacher_cfg, cache.get(), opts, &report);
      OutFile out(ann_out);
      write_annotations(out.stream(), records, opts.task, tax);
      out.commit();
      std::cerr << "annotated " << report.total << " passages: " << report.valid << " valid, " << report.invalid
                << " invalid, " << report.cache_hits << " cache hits, " << report.teacher_calls << " teacher calls\n";
    } else if (*train) {
      const StudentTask task = tr_task == "relevance" ? StudentTask::relevance : StudentTask::multilabel;
      const AnnotationTask atask = task == StudentTask::relevance ? AnnotationTask::relevance : AnnotationTask::multilabel;
      auto cin = open_in(tr_corpus);
      std::map<std::string, std::string> text_by_id;
      for (auto& p : corpus_passages(read_corpus(cin))) text_by_id[p.passage_id] = std::move(p.text);
      auto ain = open_in(tr_ann);
      std::vector<std::string> texts;
      std::vector<LabelVector> labels;
      std::size_t missing = 0, invalid = 0;
      for (auto& r : read_annotations(ain, atask, tax)) {
        if (!r.valid) {
          ++invalid;
          continue;
        }
        auto it = text_by_id.find(r.passage_id);
        if (it == text_by_id.end()) {
          ++missing;
          continue;
        }
        texts.push_back(it->second);
        labels.push_back(std::move(r.labels));
      }
      if (texts.empty()) throw ValidationError("empty_training_set", "no annotations matched corpus passages");
      std::vector<std::size_t> order(texts.size());
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(tcfg.seed);
      for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);
      const auto n_calib = static_cast<std::size_t>(calib_fraction * static_cast<double>(texts.size()));
      std::vector<std::string> tr_x, ca_x;
      std::vector<LabelVector> tr_y, ca_y;
      for (std::size_t k = 0; k < order.size(); ++k) {
        const bool calib = k >= order.size() - n_calib;
        (calib ? ca_x : tr_x).push_back(texts[order[k]]);
        (calib ? ca_y : tr_y).push_back(labels[order[k]]);
      }
      tcfg.scheme = WeightingScheme::parse(tr_scheme);
      fcfg.hash_dims = 1u << hash_bits;
      const auto ids = task == StudentTask::relevance ? std::vector<std::string>{"relevant"} : tax.ids();
      const auto version = task == StudentTask::relevance ? std::string() : tax.version();
      const auto result = train_student(task, ids, version, tr_x, tr_y, ca_x, ca_y, fcfg, tcfg);
      save_model(result.model, tr_out);
      std::cerr << "trained on " << tr_x.size() << " passages (" << ca_x.size() << " held out for thresholds; "
                << invalid << " invalid and " << missing << " unmatched annotations skipped); final loss "
                << result.train.epoch_loss.back() << '\n';
      for (std::size_t c = 0; c < ids.size(); ++c) {
        if (result.train.weights[c].degenerate) std::cerr << "  warning: label " << ids[c] << " has a single class\n";
      }
    } else if (*classify) {
      if (!std::filesystem::exists(cl_model)) throw NotFoundError("model_not_found", "model file '" + cl_model + "' does not exist");
      auto model = std::make_shared<const StudentModel>(load_model(cl_model));
      auto in = open_in(cl_in);
      const auto docs = read_corpus(in);
      OutFile out(cl_out);
      std::size_t passages = 0;
      const auto t0 = std::chrono::steady_clock::now();
      if (model->task == StudentTask::relevance) {
        const auto all = corpus_passages(docs);
        std::vector<std::string> texts;
        for (const auto& p : all) texts.push_back(p.text);
        const auto scores = cl_threads == 1 ? kernels::score_batch_serial(*model, texts)
                                            : kernels::score_batch_parallel(*model, texts, cl_threads);
        for (std::size_t i = 0; i < all.size(); ++i) {
          const bool rel = scores[i] >= model->thresholds[0];
          out.stream() << nlohmann::ordered_json{{"passage_id", all[i].passage_id},
                                                 {"labels", {{"relevant", rel ? 1 : 0}}},
                                                 {"score", scores[i]},
                                                 {"provenance", "student"},
                                                 {"valid", true}}
                              .dump()
                       << '\n';
        }
        passages = all.size();
      } else {
        const StudentConcernClassifier clf(model, tax);
        for (const auto& d : docs) {
          const auto cd = classify_document(d, clf, tax.size(), cl_threads);
          passages += cd.passages.size();
          out.stream() << classified_document_to_json(cd, tax).dump() << '\n';
        }
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      out.commit();
      if (cl_report == "timing") {
        std::cerr << "classified " << passages << " passages in " << secs << " s ("
                  << (secs > 0 ? static_cast<double>(passages) / secs : 0.0) << " passages/s, threads " << cl_threads
                  << ")\n";
      }
    } else if (*trend) {
      const auto articles = articles_for_trends(read_classified(tr_in, tax));
      const auto series = rolling_average(articles, tax.ids(), ropts);
      OutFile out(trend_out);
      if (trend_format == "csv") out.stream() << trends_to_csv(series);
      else out.stream() << trends_to_json(series).dump(2) << '\n';
      out.commit();
    } else if (*events) {
      const auto date = Date::parse(ev_date);
      if (!date) throw ValidationError("invalid_date", "--date must be YYYY-MM-DD");
      const auto articles = articles_for_trends(read_classified(ev_in, tax));
      OutFile out(ev_out);
      out.stream() << event_comparison_to_json(event_comparison(articles, tax.ids(), *date, pre_days, post_days)).dump(2)
                   << '\n';
      out.commit();
    } else if (*evaluate) {
      if (ev_task == "relevance") {
        const auto gold = read_relevance(ev_gold, tax);
        const auto pred = read_relevance(ev_pred, tax);
        std::vector<bool> g, p;
        for (const auto& [id, v] : gold) {
          auto it = pred.find(id);
          if (it == pred.end()) throw ValidationError("missing_prediction", "no prediction for passage '" + id + "'");
          g.push_back(v);
          p.push_back(it->second);
        }
        const auto m = binary_metrics(g, p);
        std::cout << binary_metrics_to_json(m).dump(2) << '\n';
      } else {
        auto gin = open_in(ev_gold);
        auto pin = open_in(ev_pred);
        const auto gold = read_passage_labels(gin, tax);
        const auto pred = read_passage_labels(pin, tax);
        std::vector<LabelVector> g, p;
        for (const auto& [id, v] : gold) {
          auto it = pred.find(id);
          if (it == pred.end()) throw ValidationError("missing_prediction", "no prediction for passage '" + id + "'");
          g.push_back(v);
          p.push_back(it->second);
        }
        const auto report = multilabel_report(g, p, tax.ids());
        if (ev_format == "json") std::cout << report_to_json(report).dump(2) << '\n';
        else if (ev_format == "csv") std::cout << report_to_csv(report);
        else std::cout << report_to_text(report);
      }
    } else if (*match) {
      auto model = std::make_shared<const StudentModel>(load_model(m_model));
      const StudentConcernClassifier clf(model, tax);
      auto in = open_in(m_store);
      const auto store = load_interventions(in, tax);
      const auto r = classify_and_match(m_text, clf, tax, store, m_top_k);
      std::cout << classify_and_match_to_json(r, tax).dump(2) << '\n';
    } else if (*serve) {
      ServiceConfig cfg = sv_config.empty() ? ServiceConfig{} : ServiceConfig::load(sv_config);
      cfg.apply_environment();
      if (*port_opt) cfg.port = scfg.port;
      if (*dir_opt) cfg.data_dir = scfg.data_dir;
      if (*model_opt) cfg.model_path = scfg.model_path;
      if (*iv_opt) cfg.interventions_path = scfg.interventions_path;
      if (*workers_opt) cfg.workers = scfg.workers;
      ServiceDeps deps = load_service_deps(cfg);
      if (demo_rules) deps.model = std::make_shared<CueRuleClassifier>(deps.taxonomy, synthetic_cues());
      ApiServer server(cfg, std::move(deps));
      std::cerr << "listening on " << cfg.host << ":" << cfg.port << '\n';
      server.run();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
