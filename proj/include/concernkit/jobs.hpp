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

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "concernkit/persistence.hpp"
#include "json.hpp"

namespace concernkit {

enum class JobKind { ingest, annotate, train, classify, trend };
enum class JobState { queued, running, done, failed };
std::string_view to_string(JobKind k) noexcept;
std::string_view to_string(JobState s) noexcept;
JobKind job_kind_from_string(std::string_view s);
JobState job_state_from_string(std::string_view s);

struct Job {
  std::string job_id;
  JobKind kind = JobKind::classify;
  JobState state = JobState::queued;
  double progress = 0.0;
  std::optional<std::string> result_ref;
  std::optional<std::string> error;
};

nlohmann::ordered_json job_to_json(const Job& j);
Job job_from_json(const nlohmann::json& j);

/// Handed to running tasks for progress reports. Progress is clamped to
/// [0, 1] and never decreases.
class JobContext {
 public:
  using Sink = std::function<void(double)>;
  JobContext(std::string job_id, Sink sink) : job_id_(std::move(job_id)), sink_(std::move(sink)) {}
  const std::string& job_id() const noexcept { return job_id_; }
  void progress(double fraction) { sink_(fraction); }

 private:
  std::string job_id_;
  Sink sink_;
};

/// Bounded worker pool whose job records live in the "jobs" collection of a
/// DataStore. Jobs found queued or running at construction belonged to a
/// process that died; they are marked failed.
class JobManager {
 public:
  /// Returns the job's result_ref. Exceptions mark the job failed with their message.
  using Task = std::function<std::string(JobContext&)>;

  JobManager(DataStore& store, std::size_t workers);
  ~JobManager();
  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  std::string submit(JobKind kind, Task task);
  std::optional<Job> get(const std::string& job_id) const;
  /// Blocks until no job is queued or running.
  void wait_idle();
  /// Jobs recovered as failed at startup.
  std::size_t recovered_failed() const noexcept { return recovered_failed_; }

 private:
  void worker_loop();
  void persist(const Job& job);
  void update(const std::string& id, const std::function<void(Job&)>& fn);

  DataStore& store_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::deque<std::pair<std::string, Task>> queue_;
  std::map<std::string, Job> jobs_;
  std::size_t next_id_ = 1;
  std::size_t active_ = 0;
  std::size_t recovered_failed_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace concernkit
