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

#include "concernkit/service.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "concernkit/analytics.hpp"
#include "concernkit/annotation.hpp"
#include "concernkit/http_util.hpp"
#include "concernkit/pipeline.hpp"
#include "concernkit/student.hpp"
#include "concernkit/text.hpp"
#include "httplib.h"

namespace concernkit {

namespace {

constexpr std::string_view kDocuments = "documents";
constexpr std::string_view kJobDocuments = "job_documents";
constexpr std::string_view kAnnotations = "annotations";

class HttpError : public Error {
 public:
  HttpError(int status, std::string code, const std::string& message) : Error(std::move(code), message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const HttpError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const NotFoundError& e) {
      send_error(res, 404, e.code(), e.what());
    } catch (const InsufficientDataError& e) {
      send_error(res, 422, e.code(), e.what());
    } catch (const ValidationError& e) {
      send_error(res, 400, e.code(), e.what());
    } catch (const FormatError& e) {
      send_error(res, 400, e.code(), e.what());
    } catch (const IntegrityError& e) {
      send_error(res, 500, e.code(), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal_error", e.what());
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  try {
    auto j = nlohmann::json::parse(req.body);
    if (!j.is_object()) throw HttpError(400, "invalid_json", "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw HttpError(400, "invalid_json", std::string("request body is not valid JSON: ") + e.what());
  }
}

std::string require_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw HttpError(400, "missing_field", std::string("field '") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

std::optional<Date> optional_date(const std::string& s, const char* what) {
  if (s.empty()) return std::nullopt;
  auto d = Date::parse(s);
  if (!d) throw HttpError(400, "invalid_date", std::string(what) + " must be YYYY-MM-DD, got '" + s + "'");
  return d;
}

long long int_param(const httplib::Request& req, const char* key, long long fallback, long long min_value) {
  if (!req.has_param(key)) return fallback;
  const std::string v = req.get_param_value(key);
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out < min_value) {
    throw HttpError(400, "invalid_parameter",
                    std::string("'") + key + "' must be an integer >= " + std::to_string(min_value));
  }
  return out;
}

}  // namespace

// --- config --------------------------------------------------------------------

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j) {
  ServiceConfig c;
  if (!j.is_object()) throw ValidationError("invalid_config", "config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "host") c.host = v.get<std::string>();
      else if (k == "port") c.port = v.get<int>();
      else if (k == "data_dir") c.data_dir = v.get<std::string>();
      else if (k == "workers") c.workers = v.get<std::size_t>();
      else if (k == "model_path") c.model_path = v.get<std::string>();
      else if (k == "interventions_path") c.interventions_path = v.get<std::string>();
      else if (k == "taxonomy_path") c.taxonomy_path = v.get<std::string>();
      else if (k == "summary_examples") c.summary_examples = v.get<std::size_t>();
      else if (k == "keyword_k") c.keyword_k = v.get<std::size_t>();
      else if (k == "default_top_k") c.default_top_k = v.get<std::size_t>();
      else if (k == "max_passage_len") c.max_passage_len = v.get<std::size_t>();
      else if (k == "max_upload_bytes") c.max_upload_bytes = v.get<std::size_t>();
      else if (k == "teacher") {
        for (auto t = v.begin(); t != v.end(); ++t) {
          if (t.key() == "endpoint") c.teacher.endpoint = t.value().get<std::string>();
          else if (t.key() == "model") c.teacher.model_name = t.value().get<std::string>();
          else if (t.key() == "api_key") c.teacher.api_key = t.value().get<std::string>();
          else if (t.key() == "max_parallel") c.teacher.max_parallel = t.value().get<int>();
          else if (t.key() == "retry_limit") c.teacher.retry_limit = t.value().get<int>();
          else if (t.key() == "timeout_ms") c.teacher.timeout = std::chrono::milliseconds(t.value().get<long long>());
          else throw ValidationError("invalid_config", "unknown teacher key '" + t.key() + "'");
        }
      } else {
        throw ValidationError("invalid_config", "unknown config key '" + k + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_config", std::string("bad config value: ") + e.what());
  }
  if (c.workers < 1) throw ValidationError("invalid_config", "workers must be >= 1");
  if (c.port < 0 || c.port > 65535) throw ValidationError("invalid_config", "port out of range");
  return c;
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  try {
    return from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_config", path.string() + ": " + e.what());
  }
}

void ServiceConfig::apply_environment() {
  auto env = [](const char* name) -> const char* { return std::getenv(name); };
  auto to_int = [](const char* name, const char* v) {
    try {
      return std::stoll(v);
    } catch (const std::exception&) {
      throw ValidationError("invalid_config", std::string(name) + " is not an integer");
    }
  };
  if (const char* v = env("CONCERNKIT_HOST")) host = v;
  if (const char* v = env("CONCERNKIT_PORT")) port = static_cast<int>(to_int("CONCERNKIT_PORT", v));
  if (const char* v = env("CONCERNKIT_DATA_DIR")) data_dir = v;
  if (const char* v = env("CONCERNKIT_WORKERS")) workers = static_cast<std::size_t>(to_int("CONCERNKIT_WORKERS", v));
  if (const char* v = env("CONCERNKIT_MODEL")) model_path = v;
  if (const char* v = env("CONCERNKIT_INTERVENTIONS")) interventions_path = v;
  if (const char* v = env("CONCERNKIT_TAXONOMY")) taxonomy_path = v;
  teacher.apply_environment();
  if (workers < 1) throw ValidationError("invalid_config", "workers must be >= 1");
}

ServiceDeps load_service_deps(const ServiceConfig& config) {
  ServiceDeps deps;
  if (!config.taxonomy_path.empty()) deps.taxonomy = load_taxonomy_file(config.taxonomy_path);
  if (!config.model_path.empty()) {
    auto model = std::make_shared<const StudentModel>(load_model(config.model_path));
    deps.model = std::make_shared<StudentConcernClassifier>(model, deps.taxonomy);
  }
  if (!config.interventions_path.empty()) {
    std::ifstream in(config.interventions_path);
    if (!in) throw IoError("cannot open interventions file '" + config.interventions_path + "'");
    deps.interventions = load_interventions(in, deps.taxonomy);
  }
  if (!config.teacher.endpoint.empty()) deps.teacher = std::make_shared<HttpTeacherClient>(config.teacher);
  return deps;
}

// --- server ----------------------------------------------------------------------

ApiServer::ApiServer(ServiceConfig config, ServiceDeps deps)
    : config_(std::move(config)), deps_(std::move(deps)), store_(config_.data_dir) {
  jobs_ = std::make_unique<JobManager>(store_, config_.workers);
  if (!deps_.fetch) {
    const FetchOptions opts{std::chrono::milliseconds(10'000), 2, config_.max_passage_len};
    deps_.fetch = [opts](const std::string& url, const DocumentMeta& meta) { return ingest_url(url, opts, meta); };
  }
  http_ = std::make_unique<httplib::Server>();
  http_->set_payload_max_length(config_.max_upload_bytes);
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  int port = config_.port;
  if (port == 0) {
    port = http_->bind_to_any_port(config_.host);
  } else if (!http_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) throw IoError("cannot bind " + config_.host + ":" + std::to_string(config_.port));
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port;
}

void ApiServer::run() {
  if (!http_->listen(config_.host, config_.port)) {
    throw IoError("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

void ApiServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string ApiServer::submit_documents(JobKind kind, std::function<std::vector<Document>(JobContext&)> produce) {
  if (!deps_.model) throw HttpError(503, "model_not_loaded", "no classification model is configured");
  return jobs_->submit(kind, [this, produce = std::move(produce)](JobContext& ctx) -> std::string {
    std::vector<Document> docs = produce(ctx);
    ctx.progress(0.1);
    nlohmann::json ids = nlohmann::json::array();
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto& doc = docs[i];
      const ClassifiedDocument cd = classify_document(doc, *deps_.model, deps_.taxonomy.size());
      if (!article_invariant_holds(cd)) throw Error("invariant_violation", "article labels differ from passage OR");
      auto j = classified_document_to_json(cd, deps_.taxonomy);
      j["job_id"] = ctx.job_id();
      j["raw_blob"] = store_.put_blob(doc.raw_text);
      store_.put_record(kDocuments, doc.doc_id, nlohmann::json(j));
      ids.push_back(doc.doc_id);
      ctx.progress(0.1 + 0.9 * static_cast<double>(i + 1) / static_cast<double>(docs.size()));
    }
    store_.put_record(kJobDocuments, ctx.job_id(), {{"doc_ids", ids}});
    return docs.size() == 1 ? docs.front().doc_id : "job_documents/" + ctx.job_id();
  });
}

void ApiServer::install_routes() {
  auto& s = *http_;
  const Taxonomy& tax = deps_.taxonomy;

  s.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200,
              {{"status", "ok"},
               {"taxonomy_version", deps_.taxonomy.version()},
               {"model_loaded", deps_.model != nullptr},
               {"interventions", deps_.interventions.size()},
               {"teacher_configured", deps_.teacher != nullptr}});
  }));

  s.Get("/api/taxonomy", guarded([&tax](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, taxonomy_to_json(tax));
  }));

  s.Post("/api/upload/text", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    DocumentMeta meta;
    meta.date = optional_date(body.value("date", ""), "date");
    if (body.contains("id")) meta.id = require_string(body, "id");
    auto doc = std::make_shared<Document>(ingest_text(require_string(body, "text"), meta, config_.max_passage_len));
    const auto id = submit_documents(JobKind::classify, [doc](JobContext&) { return std::vector<Document>{*doc}; });
    send_json(res, 202, {{"job_id", id}});
  }));

  s.Post("/api/upload/url", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const std::string url = require_string(body, "url");
    if (!parse_http_url(url)) throw HttpError(400, "invalid_url", "not an http(s) URL: '" + url + "'");
    DocumentMeta meta;
    meta.date = optional_date(body.value("date", ""), "date");
    meta.source = SourceKind::url;
    meta.url = url;
    const auto id = submit_documents(JobKind::ingest, [this, url, meta](JobContext&) {
      return std::vector<Document>{deps_.fetch(url, meta)};
    });
    send_json(res, 202, {{"job_id", id}});
  }));

  s.Post("/api/upload/file", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::string bytes, format = req.has_param("format") ? req.get_param_value("format") : "";
    if (req.is_multipart_form_data()) {
      if (!req.has_file("file")) throw HttpError(400, "missing_field", "multipart field 'file' is required");
      bytes = req.get_file_value("file").content;
      if (req.has_file("format")) format = req.get_file_value("format").content;
    } else {
      bytes = req.body;
    }
    if (format.empty()) throw HttpError(400, "missing_field", "'format' (jsonl|csv|plain) is required");
    const FileFormat ff = file_format_from_string(format);
    auto data = std::make_shared<std::string>(std::move(bytes));
    const std::size_t max_len = config_.max_passage_len;
    const auto id = submit_documents(JobKind::ingest, [data, ff, max_len](JobContext&) {
      auto result = ingest_file(*data, ff, max_len);
      for (auto& d : result.documents) d.source = SourceKind::file;
      return std::move(result.documents);
    });
    send_json(res, 202, {{"job_id", id}});
  }));

  s.Get(R"(/api/jobs/([A-Za-z0-9_.-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto job = jobs_->get(req.matches[1]);
    if (!job) throw NotFoundError("job_not_found", "no job '" + std::string(req.matches[1]) + "'");
    auto j = job_to_json(*job);
    if (auto rec = store_.get_record(kJobDocuments, job->job_id)) j["documents"] = (*rec)["doc_ids"];
    send_json(res, 200, j);
  }));

  s.Get(R"(/api/documents/([A-Za-z0-9_.:%-]+))", guarded([this, &tax](const httplib::Request& req,
                                                                        httplib::Response& res) {
    const std::string id = req.matches[1];
    auto rec = store_.get_record(kDocuments, id);
    if (!rec) throw NotFoundError("document_not_found", "no document '" + id + "'");
    if (!article_invariant_holds(classified_document_from_json(*rec, tax))) {
      throw HttpError(500, "invariant_violation", "stored article labels differ from the OR of passage labels");
    }
    res.status = 200;
    res.set_content(rec->dump(), "application/json");
  }));

  s.Get(R"(/api/summary/([A-Za-z0-9_.-]+))", guarded([this, &tax](const httplib::Request& req,
                                                                    httplib::Response& res) {
    const std::string job_id = req.matches[1];
    const auto job = jobs_->get(job_id);
    if (!job) throw NotFoundError("job_not_found", "no job '" + job_id + "'");
    if (job->state != JobState::done) {
      throw HttpError(409, "job_not_done", "job '" + job_id + "' is " + std::string(to_string(job->state)));
    }
    const auto listing = store_.get_record(kJobDocuments, job_id);
    if (!listing) throw NotFoundError("summary_not_found", "job '" + job_id + "' produced no documents");
    std::vector<ClassifiedDocument> docs;
    for (const auto& id : (*listing)["doc_ids"]) {
      auto rec = store_.get_record(kDocuments, id.get<std::string>());
      if (rec) docs.push_back(classified_document_from_json(*rec, tax));
    }
    nlohmann::ordered_json concerns = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < tax.size(); ++c) {
      std::vector<const ClassifiedPassage*> pos;
      for (const auto& d : docs) {
        for (const auto& p : d.passages) {
          if (p.result.labels[c]) pos.push_back(&p);
        }
      }
      std::sort(pos.begin(), pos.end(), [c](const ClassifiedPassage* a, const ClassifiedPassage* b) {
        if (a->result.scores[c] != b->result.scores[c]) return a->result.scores[c] > b->result.scores[c];
        return a->passage.passage_id < b->passage.passage_id;
      });
      nlohmann::ordered_json examples = nlohmann::ordered_json::array();
      std::vector<std::string> texts;
      for (std::size_t k = 0; k < pos.size(); ++k) {
        texts.push_back(pos[k]->passage.text);
        if (k < config_.summary_examples) {
          examples.push_back({{"passage_id", pos[k]->passage.passage_id},
                              {"doc_id", pos[k]->passage.doc_id},
                              {"start", pos[k]->passage.start},
                              {"end", pos[k]->passage.end},
                              {"score", pos[k]->result.scores[c]},
                              {"text", pos[k]->passage.text}});
        }
      }
      const auto cloud = keyword_cloud(tax.node(c).id, texts, default_stopwords(), config_.keyword_k);
      concerns.push_back({{"concern_id", tax.node(c).id},
                          {"name", tax.node(c).name},
                          {"passage_count", pos.size()},
                          {"examples", examples},
                          {"keywords", keyword_cloud_to_json(cloud)["entries"]}});
    }
    send_json(res, 200, {{"job_id", job_id}, {"documents", (*listing)["doc_ids"]}, {"concerns", concerns}});
  }));

  s.Post("/api/interventions/query", guarded([this, &tax](const httplib::Request& req, httplib::Response& res) {
    if (!deps_.model) throw HttpError(503, "model_not_loaded", "no classification model is configured");
    const auto body = parse_body(req);
    const std::string text = require_string(body, "text");
    if (text::trim(text).empty()) throw ValidationError("empty_input", "text is empty");
    std::size_t top_k = config_.default_top_k;
    if (body.contains("top_k")) {
      if (!body["top_k"].is_number_integer() || body["top_k"].get<long long>() < 1) {
        throw HttpError(400, "invalid_parameter", "'top_k' must be an integer >= 1");
      }
      top_k = body["top_k"].get<std::size_t>();
    }
    const auto r = classify_and_match(text, *deps_.model, tax, deps_.interventions, top_k);
    send_json(res, 200, classify_and_match_to_json(r, tax));
  }));

  auto load_articles = [this, &tax](const httplib::Request& req) {
    std::vector<ClassifiedDocument> docs;
    for (const auto& id : store_.list_records(kDocuments)) {
      if (auto rec = store_.get_record(kDocuments, id)) docs.push_back(classified_document_from_json(*rec, tax));
    }
    auto articles = articles_for_trends(docs);
    const auto from = optional_date(req.has_param("from") ? req.get_param_value("from") : "", "from");
    const auto to = optional_date(req.has_param("to") ? req.get_param_value("to") : "", "to");
    std::erase_if(articles, [&](const ArticleLabel& a) { return (from && a.date < *from) || (to && a.date > *to); });
    return articles;
  };

  s.Get("/api/trends", guarded([&tax, load_articles](const httplib::Request& req, httplib::Response& res) {
    RollingOptions opts;
    opts.window = static_cast<std::size_t>(int_param(req, "window", 500, 1));
    const std::string partial = req.has_param("partial") ? req.get_param_value("partial") : "false";
    if (partial != "true" && partial != "false") throw HttpError(400, "invalid_parameter", "'partial' must be true|false");
    opts.emit_partial = partial == "true";
    const std::string format = req.has_param("format") ? req.get_param_value("format") : "json";
    if (format != "json" && format != "csv") throw HttpError(400, "invalid_parameter", "'format' must be json|csv");
    const auto series = rolling_average(load_articles(req), tax.ids(), opts);
    if (format == "csv") {
      res.status = 200;
      res.set_content(trends_to_csv(series), "text/csv");
    } else {
      send_json(res, 200, {{"window", opts.window}, {"series", trends_to_json(series)}});
    }
  }));

  s.Get("/api/events/compare", guarded([&tax, load_articles](const httplib::Request& req, httplib::Response& res) {
    if (!req.has_param("date")) throw HttpError(400, "missing_field", "'date' is required");
    const auto date = optional_date(req.get_param_value("date"), "date");
    if (!date) throw HttpError(400, "missing_field", "'date' is required");
    const auto pre = static_cast<int>(int_param(req, "pre_days", 30, 1));
    const auto post = static_cast<int>(int_param(req, "post_days", 30, 1));
    send_json(res, 200, event_comparison_to_json(event_comparison(load_articles(req), tax.ids(), *date, pre, post)));
  }));

  s.Post("/api/annotate", guarded([this, &tax](const httplib::Request& req, httplib::Response& res) {
    if (!deps_.teacher) throw HttpError(503, "teacher_not_configured", "no teacher endpoint is configured");
    const auto body = parse_body(req);
    const std::string source_job = require_string(body, "job_id");
    const AnnotationTask task = annotation_task_from_string(body.value("mode", "multilabel"));
    const auto listing = store_.get_record(kJobDocuments, source_job);
    if (!listing) throw NotFoundError("job_not_found", "job '" + source_job + "' has no documents");
    auto passages = std::make_shared<std::vector<Passage>>();
    for (const auto& id : (*listing)["doc_ids"]) {
      if (auto rec = store_.get_record(kDocuments, id.get<std::string>())) {
        for (auto& p : classified_document_from_json(*rec, tax).passages) passages->push_back(std::move(p.passage));
      }
    }
    const auto id = jobs_->submit(JobKind::annotate, [this, passages, task, &tax](JobContext& ctx) {
      AnnotationCache cache(store_);
      AnnotateOptions opts;
      opts.task = task;
      opts.progress = [&ctx](std::size_t done, std::size_t total) {
        ctx.progress(static_cast<double>(done) / static_cast<double>(total));
      };
      AnnotationReport report;
      const auto records = annotate_corpus(*passages, tax, *deps_.teacher, config_.teacher, &cache, opts, &report);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& r : records) out.push_back(nlohmann::json(annotation_to_json(r, task, tax)));
      store_.put_record(kAnnotations, ctx.job_id(),
                        {{"mode", to_string(task)},
                         {"records", out},
                         {"report",
                          {{"total", report.total},
                           {"valid", report.valid},
                           {"invalid", report.invalid},
                           {"cache_hits", report.cache_hits},
                           {"teacher_calls", report.teacher_calls}}}});
      return "annotations/" + ctx.job_id();
    });
    send_json(res, 202, {{"job_id", id}});
  }));

  s.Get(R"(/api/annotations/([A-Za-z0-9_.-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto rec = store_.get_record(kAnnotations, req.matches[1].str());
    if (!rec) throw NotFoundError("annotations_not_found", "no annotations for job '" + std::string(req.matches[1]) + "'");
    res.status = 200;
    res.set_content(rec->dump(), "application/json");
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.status == 404 && res.body.empty()) send_error(res, 404, "not_found", "no such endpoint");
  });
}

}  // namespace concernkit
