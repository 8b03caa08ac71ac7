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

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "concernkit/classifier.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/interventions.hpp"
#include "concernkit/jobs.hpp"
#include "concernkit/persistence.hpp"
#include "concernkit/taxonomy.hpp"
#include "concernkit/teacher.hpp"

namespace httplib {
class Server;
}

namespace concernkit {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir = "concernkit-data";
  std::size_t workers = 2;
  std::string model_path;          // multilabel student model
  std::string interventions_path;  // JSONL store
  std::string taxonomy_path;       // empty: bundled taxonomy
  TeacherConfig teacher;           // used by /api/annotate when endpoint is set
  std::size_t summary_examples = 3;
  std::size_t keyword_k = 50;
  std::size_t default_top_k = 5;
  std::size_t max_passage_len = kDefaultMaxPassageLen;
  std::size_t max_upload_bytes = 64u << 20;

  /// Keys mirror the field names; unknown keys are rejected.
  static ServiceConfig from_json(const nlohmann::json& j);
  static ServiceConfig load(const std::filesystem::path& path);
  /// CONCERNKIT_HOST, _PORT, _DATA_DIR, _WORKERS, _MODEL, _INTERVENTIONS,
  /// _TAXONOMY, and the teacher variables.
  void apply_environment();
};

struct ServiceDeps {
  Taxonomy taxonomy = default_taxonomy();
  std::shared_ptr<const ConcernClassifier> model;
  InterventionStore interventions;
  std::shared_ptr<TeacherClient> teacher;  // optional
  /// URL fetcher; defaults to ingest_url. Tests substitute fixtures.
  std::function<Document(const std::string& url, const DocumentMeta& meta)> fetch;
};

/// JSON HTTP API over one data directory. Models and the intervention store
/// are loaded once and shared read-only across handlers; long-running work
/// is queued on the job pool.
class ApiServer {
 public:
  ApiServer(ServiceConfig config, ServiceDeps deps);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

  DataStore& store() noexcept { return store_; }
  JobManager& jobs() noexcept { return *jobs_; }
  const Taxonomy& taxonomy() const noexcept { return deps_.taxonomy; }

 private:
  void install_routes();
  std::string submit_documents(JobKind kind, std::function<std::vector<Document>(JobContext&)> produce);

  ServiceConfig config_;
  ServiceDeps deps_;
  DataStore store_;
  std::unique_ptr<JobManager> jobs_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
};

/// Builds dependencies from a config: taxonomy, student model, interventions,
/// optional HTTP teacher.
ServiceDeps load_service_deps(const ServiceConfig& config);

}  // namespace concernkit
