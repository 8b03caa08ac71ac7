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

#include "concernkit/jobs.hpp"

#include <algorithm>
#include <cstdio>

#include "concernkit/error.hpp"

namespace concernkit {

namespace {
constexpr std::string_view kJobs = "jobs";

std::string format_job_id(std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "job-%06zu", n);
  return buf;
}
}  // namespace

std::string_view to_string(JobKind k) noexcept {
  switch (k) {
    case JobKind::ingest: return "ingest";
    case JobKind::annotate: return "annotate";
    case JobKind::train: return "train";
    case JobKind::classify: return "classify";
    case JobKind::trend: return "trend";
  }
  return "classify";
}

std::string_view to_string(JobState s) noexcept {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "failed";
}

JobKind job_kind_from_string(std::string_view s) {
  for (auto k : {JobKind::ingest, JobKind::annotate, JobKind::train, JobKind::classify, JobKind::trend}) {
    if (to_string(k) == s) return k;
  }
  throw FormatError("unknown job kind '" + std::string(s) + "'");
}

JobState job_state_from_string(std::string_view s) {
  for (auto k : {JobState::queued, JobState::running, JobState::done, JobState::failed}) {
    if (to_string(k) == s) return k;
  }
  throw FormatError("unknown job state '" + std::string(s) + "'");
}

nlohmann::ordered_json job_to_json(const Job& j) {
  nlohmann::ordered_json o{{"job_id", j.job_id},
                           {"kind", to_string(j.kind)},
                           {"state", to_string(j.state)},
                           {"progress", j.progress}};
  o["result_ref"] = j.result_ref ? nlohmann::ordered_json(*j.result_ref) : nlohmann::ordered_json(nullptr);
  o["error"] = j.error ? nlohmann::ordered_json(*j.error) : nlohmann::ordered_json(nullptr);
  return o;
}

Job job_from_json(const nlohmann::json& j) {
  Job job;
  try {
    job.job_id = j.at("job_id").get<std::string>();
    job.kind = job_kind_from_string(j.at("kind").get<std::string>());
    job.state = job_state_from_string(j.at("state").get<std::string>());
    job.progress = j.at("progress").get<double>();
    if (j.contains("result_ref") && j["result_ref"].is_string()) job.result_ref = j["result_ref"].get<std::string>();
    if (j.contains("error") && j["error"].is_string()) job.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed job record: ") + e.what());
  }
  return job;
}

JobManager::JobManager(DataStore& store, std::size_t workers) : store_(store) {
  if (workers < 1) throw ValidationError("invalid_config", "worker count must be >= 1");
  for (const auto& id : store_.list_records(kJobs)) {
    auto rec = store_.get_record(kJobs, id);
    if (!rec) continue;
    Job job = job_from_json(*rec);
    if (job.state == JobState::queued || job.state == JobState::running) {
      job.state = JobState::failed;
      job.error = "interrupted: the service restarted before the job finished";
      persist(job);
      ++recovered_failed_;
    }
    if (job.job_id.starts_with("job-")) {
      try {
        next_id_ = std::max(next_id_, std::stoul(job.job_id.substr(4)) + 1);
      } catch (const std::exception&) {
      }
    }
    jobs_[job.job_id] = std::move(job);
  }
  for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobManager::~JobManager() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void JobManager::persist(const Job& job) { store_.put_record(kJobs, job.job_id, job_to_json(job)); }

std::string JobManager::submit(JobKind kind, Task task) {
  std::lock_guard lock(mu_);
  Job job;
  job.job_id = format_job_id(next_id_++);
  job.kind = kind;
  persist(job);
  jobs_[job.job_id] = job;
  queue_.emplace_back(job.job_id, std::move(task));
  cv_.notify_one();
  return job.job_id;
}

std::optional<Job> JobManager::get(const std::string& job_id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

void JobManager::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

void JobManager::update(const std::string& id, const std::function<void(Job&)>& fn) {
  std::lock_guard lock(mu_);
  Job& job = jobs_.at(id);
  fn(job);
  persist(job);
}

void JobManager::worker_loop() {
  for (;;) {
    std::pair<std::string, Task> item;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;  // stopping
      item = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
    }
    const std::string& id = item.first;
    update(id, [](Job& j) { j.state = JobState::running; });
    JobContext ctx(id, [this, id](double f) {
      update(id, [f](Job& j) { j.progress = std::max(j.progress, std::clamp(f, 0.0, 1.0)); });
    });
    try {
      std::string ref = item.second(ctx);
      update(id, [&](Job& j) {
        j.state = JobState::done;
        j.progress = 1.0;
        j.result_ref = std::move(ref);
      });
    } catch (const std::exception& e) {
      update(id, [&](Job& j) {
        j.state = JobState::failed;
        j.error = e.what();
      });
    }
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

}  // namespace concernkit
