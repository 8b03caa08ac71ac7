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

#include "concernkit/teacher.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "concernkit/http_util.hpp"
#include "concernkit/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace concernkit {

namespace {

constexpr std::string_view kRelevancePreamble =
    "You will be given a small paragraph of text. Please return whether the text is relevant to vaccines. "
    "Text is vaccine-related if it mentions vaccines in some way, indirectly or directly. Note that the sentences "
    "may be vaccine relevant even if there aren't any keywords like \"vaccine\" or \"vaccination\". Think carefully "
    "about your answer as this task is important, then return a 'Yes' or 'No' indicating if the paragraph discusses "
    "vaccination. \n Paragraph input: ";

constexpr std::string_view kMultilabelIntro =
    "You are a healthcare expert helping to determine whether a passage includes vaccine concerns. You have a deep "
    "understanding of vaccine-related topics and are capable of providing accurate assessments regarding specific "
    "vaccine concerns mentioned in the passage.\n\n";

constexpr std::string_view kMultilabelQuestion =
    "Please read the passage and determine whether the specific concern about the vaccine is mentioned. If it is, "
    "return 1; otherwise, return 0.\n\n"
    "In your response, please return in the following format:\n";

constexpr std::string_view kParagraphMarker = "\nParagraph: ";
constexpr std::string_view kIndividualLead = "\n\nIn your response, please only return for the ";

}  // namespace

std::string build_relevance_prompt(std::string_view passage_text) {
  if (text::trim(passage_text).empty()) throw ValidationError("empty_passage", "passage text is empty");
  std::string out;
  out.reserve(kRelevancePreamble.size() + passage_text.size());
  out += kRelevancePreamble;
  out += passage_text;
  return out;
}

std::string build_multilabel_prompt(std::string_view passage_text, const Taxonomy& t, const PromptMode& mode) {
  if (mode.kind == PromptMode::Kind::individual) t.require_index(mode.node_id);
  if (text::trim(passage_text).empty()) throw ValidationError("empty_passage", "passage text is empty");

  const std::string& prefix = t.label_prefix();
  std::string out(kMultilabelIntro);
  out += "You will be given a passage and a set of vaccine concerns in a hierarchical order, labeled as \"";
  out += prefix + "_" + t.node(0).id + "\"";
  if (t.size() > 1) out += ", \"" + prefix + "_" + t.node(1).id + "\"";
  if (t.size() > 2) out += ", ... , \"" + prefix + "_" + t.node(t.size() - 1).id + "\"";
  out += ". You will have the definition for each of the labels.\n\nVaccine Concerns:\n";
  for (const auto& n : t.nodes()) {
    out += n.is_parent() ? "- " : "    - ";
    out += prefix + "_" + n.id + ": \"" + n.name + "\" - " + n.definition + "\n";
  }
  out += kMultilabelQuestion;
  for (const auto& n : t.nodes()) out += "- " + prefix + "_" + n.id + ": [0/1]\n";
  out += kParagraphMarker.substr(1);
  out += passage_text;
  if (mode.kind == PromptMode::Kind::individual) {
    out += kIndividualLead;
    out += prefix + "_" + mode.node_id + " label. We will ask you about the other labels later.";
  }
  return out;
}

std::optional<std::string> extract_prompt_passage(std::string_view prompt) {
  if (prompt.substr(0, kRelevancePreamble.size()) == kRelevancePreamble) {
    return std::string(prompt.substr(kRelevancePreamble.size()));
  }
  if (prompt.substr(0, kMultilabelIntro.size()) != kMultilabelIntro) return std::nullopt;
  const auto pos = prompt.find(kParagraphMarker);
  if (pos == std::string_view::npos) return std::nullopt;
  std::string_view rest = prompt.substr(pos + kParagraphMarker.size());
  if (const auto lead = rest.rfind(kIndividualLead); lead != std::string_view::npos) rest = rest.substr(0, lead);
  return std::string(rest);
}

bool parse_relevance_response(std::string_view raw) {
  bool yes = false, no = false;
  text::for_each_word(raw, [&](std::string_view w) {
    const std::string lw = text::to_lower_ascii(w);
    if (lw == "yes") yes = true;
    if (lw == "no") no = true;
  });
  if (yes == no) {
    throw UnparseableResponse(yes ? "relevance response contains both Yes and No"
                                  : "relevance response contains neither Yes nor No");
  }
  return yes;
}

namespace {

struct LabelLine {
  std::string id;
  std::string value;  // raw value token after separators/brackets
};

// Finds "<prefix>_<id>" in a line and returns the id plus the value token.
std::optional<LabelLine> match_label_line(std::string_view line, const std::string& lower_prefix) {
  const std::string lower = text::to_lower_ascii(line);
  const auto pos = lower.find(lower_prefix);
  if (pos == std::string::npos) return std::nullopt;
  std::size_t i = pos + lower_prefix.size();
  if (i >= lower.size() || (lower[i] != '_' && lower[i] != ' ')) return std::nullopt;
  ++i;
  const std::size_t id_start = i;
  while (i < lower.size() && (std::isdigit(static_cast<unsigned char>(lower[i])) || lower[i] == '.')) ++i;
  std::string id = lower.substr(id_start, i - id_start);
  while (!id.empty() && id.back() == '.') id.pop_back();
  if (id.empty()) return std::nullopt;

  auto skip = [&](std::string_view chars) {
    while (i < lower.size() && (text::is_space(lower[i]) || chars.find(lower[i]) != std::string_view::npos)) ++i;
  };
  skip("\"'*:=-");
  skip("[(");
  const std::size_t v_start = i;
  while (i < lower.size() && !text::is_space(lower[i]) && lower[i] != ']' && lower[i] != ')' && lower[i] != ',') ++i;
  std::string value = lower.substr(v_start, i - v_start);
  while (!value.empty() && (value.back() == '.' || value.back() == '*')) value.pop_back();
  return LabelLine{std::move(id), std::move(value)};
}

}  // namespace

LabelVector parse_multilabel_response(std::string_view raw, const Taxonomy& t) {
  const std::string lower_prefix = text::to_lower_ascii(t.label_prefix());
  LabelVector v(t.size());
  std::vector<bool> seen(t.size(), false);
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    if (auto m = match_label_line(raw.substr(pos, nl - pos), lower_prefix)) {
      if (auto idx = t.index_of(m->id)) {
        if (seen[*idx]) throw UnparseableResponse("duplicate line for label " + m->id);
        if (m->value != "0" && m->value != "1") {
          throw UnparseableResponse("label " + m->id + " has non-binary value '" + m->value + "'");
        }
        seen[*idx] = true;
        v.set(*idx, m->value == "1");
      }
    }
    pos = nl + 1;
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!seen[i]) throw UnparseableResponse("response is missing label " + t.node(i).id);
  }
  return v;
}

bool parse_single_label_response(std::string_view raw, const Taxonomy& t, std::string_view node_id) {
  t.require_index(node_id);
  const std::string lower_prefix = text::to_lower_ascii(t.label_prefix());
  std::optional<bool> result;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    if (auto m = match_label_line(raw.substr(pos, nl - pos), lower_prefix); m && m->id == node_id) {
      if (result) throw UnparseableResponse("duplicate line for label " + m->id);
      if (m->value != "0" && m->value != "1") throw UnparseableResponse("non-binary value '" + m->value + "'");
      result = m->value == "1";
    }
    pos = nl + 1;
  }
  if (result) return *result;
  std::string bare(text::trim(raw));
  if (bare.size() >= 2 && bare.front() == '[' && bare.back() == ']') bare = bare.substr(1, bare.size() - 2);
  if (bare == "0" || bare == "1") return bare == "1";
  throw UnparseableResponse("no answer for label " + std::string(node_id));
}

std::string format_multilabel_response(const LabelVector& v, const Taxonomy& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += t.label_prefix() + "_" + t.node(i).id + ": " + (v[i] ? "1" : "0") + "\n";
  }
  return out;
}

void TeacherConfig::validate() const {
  if (max_parallel < 1) throw ValidationError("invalid_config", "teacher max_parallel must be >= 1");
  if (retry_limit < 0) throw ValidationError("invalid_config", "teacher retry_limit must be >= 0");
}

void TeacherConfig::apply_environment() {
  if (const char* v = std::getenv("CONCERNKIT_TEACHER_ENDPOINT")) endpoint = v;
  if (const char* v = std::getenv("CONCERNKIT_TEACHER_MODEL")) model_name = v;
  if (const char* v = std::getenv("CONCERNKIT_TEACHER_API_KEY")) api_key = v;
}

HttpTeacherClient::HttpTeacherClient(TeacherConfig config) : config_(std::move(config)) {
  config_.validate();
  auto url = parse_http_url(config_.endpoint);
  if (!url) throw ValidationError("invalid_url", "teacher endpoint is not an http(s) URL: '" + config_.endpoint + "'");
  base_ = url->base;
  path_ = url->path;
}

std::string HttpTeacherClient::request_body(const std::string& model, const std::string& prompt,
                                            std::optional<double> temperature) {
  nlohmann::ordered_json j;
  j["model"] = model;
  j["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  if (temperature) j["temperature"] = *temperature;
  return j.dump();
}

std::string HttpTeacherClient::response_text(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw TeacherError(std::string("malformed chat-completion response: ") + e.what());
  }
}

std::string HttpTeacherClient::complete(const std::string& prompt) {
  // one client per call keeps the object usable from several threads
  httplib::Client client(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  auto res = client.Post(path_, headers, request_body(config_.model_name, prompt, config_.temperature),
                         "application/json");
  if (!res) throw TeacherError("teacher request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TeacherError("teacher returned HTTP " + std::to_string(res->status));
  return response_text(res->body);
}

ScriptedTeacher::ScriptedTeacher(Responder responder, std::string model)
    : responder_(std::move(responder)), model_(std::move(model)) {}

std::string ScriptedTeacher::complete(const std::string& prompt) {
  const std::size_t index = calls_.fetch_add(1);
  return responder_(prompt, index);
}

}  // namespace concernkit
