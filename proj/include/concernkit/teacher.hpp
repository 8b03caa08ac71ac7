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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/error.hpp"
#include "concernkit/ingestion.hpp"
#include "concernkit/taxonomy.hpp"

namespace concernkit {

// --- Prompts ----------------------------------------------------------------

/// Relevance prompt with the passage substituted once (no recursive templating).
/// Throws ValidationError("empty_passage") for blank text.
std::string build_relevance_prompt(std::string_view passage_text);

struct PromptMode {
  enum class Kind { all_in_one, individual } kind = Kind::all_in_one;
  std::string node_id;  // set for individual

  static PromptMode all_in_one() { return {}; }
  static PromptMode individual(std::string id) { return {Kind::individual, std::move(id)}; }
};

/// Multilabel prompt listing every node with its definition. Individual mode
/// appends the single-label instruction. Throws ValidationError("unknown_node").
std::string build_multilabel_prompt(std::string_view passage_text, const Taxonomy& t, const PromptMode& mode);

/// Recovers the passage text from a prompt produced by the builders above.
std::optional<std::string> extract_prompt_passage(std::string_view prompt);

// --- Response parsing -------------------------------------------------------

class UnparseableResponse : public Error {
 public:
  explicit UnparseableResponse(const std::string& message) : Error("unparseable_response", message) {}
};

/// Case-insensitive standalone yes/no token. Neither or both -> UnparseableResponse.
bool parse_relevance_response(std::string_view raw);

/// One 0/1 per node from "<prefix>_<id>: [0/1]" lines; tolerant of bullets,
/// brackets, whitespace and case. Missing, duplicate or non-binary -> UnparseableResponse.
LabelVector parse_multilabel_response(std::string_view raw, const Taxonomy& t);

/// Single-label answer for individual prompting: a "<prefix>_<id>: 1" line or a bare 0/1.
bool parse_single_label_response(std::string_view raw, const Taxonomy& t, std::string_view node_id);

/// Response text in the all-in-one format for `v` (what a perfect teacher returns).
std::string format_multilabel_response(const LabelVector& v, const Taxonomy& t);

// --- Teacher clients ----------------------------------------------------------

struct TeacherConfig {
  std::string endpoint;  // full URL of the chat-completions endpoint
  std::string model_name = "gpt-4";
  std::string api_key;
  int max_parallel = 4;
  int retry_limit = 2;
  std::chrono::milliseconds timeout{60'000};
  std::chrono::milliseconds backoff_base{500};
  std::optional<double> temperature;

  /// Throws ValidationError when max_parallel < 1 or retry_limit < 0.
  void validate() const;
  /// Fills endpoint/model/key from CONCERNKIT_TEACHER_ENDPOINT, _MODEL, _API_KEY when set.
  void apply_environment();
};

/// Transport-level failure talking to the teacher (retryable).
class TeacherError : public Error {
 public:
  explicit TeacherError(const std::string& message) : Error("teacher_error", message) {}
};

class TeacherClient {
 public:
  virtual ~TeacherClient() = default;
  /// Returns the raw completion text. Throws TeacherError on transport failure.
  virtual std::string complete(const std::string& prompt) = 0;
  virtual std::string model_name() const = 0;
};

/// OpenAI-style chat completion over HTTP:
///   POST {model, messages:[{role:"user", content}]} -> choices[0].message.content
class HttpTeacherClient final : public TeacherClient {
 public:
  explicit HttpTeacherClient(TeacherConfig config);
  std::string complete(const std::string& prompt) override;
  std::string model_name() const override { return config_.model_name; }

  static std::string request_body(const std::string& model, const std::string& prompt, std::optional<double> temperature);
  static std::string response_text(std::string_view body);

 private:
  TeacherConfig config_;
  std::string base_;
  std::string path_;
};

/// Deterministic mock. The responder gets the prompt and the 0-based global
/// call index; it may throw TeacherError to simulate transport failures.
class ScriptedTeacher final : public TeacherClient {
 public:
  using Responder = std::function<std::string(const std::string& prompt, std::size_t call_index)>;

  explicit ScriptedTeacher(Responder responder, std::string model = "scripted-mock");
  std::string complete(const std::string& prompt) override;
  std::string model_name() const override { return model_; }

  std::size_t calls() const noexcept { return calls_.load(); }

 private:
  Responder responder_;
  std::string model_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace concernkit
