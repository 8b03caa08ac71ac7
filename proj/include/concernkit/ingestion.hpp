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

#include <chrono>
#include <cstddef>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/date.hpp"
#include "concernkit/error.hpp"
#include "json.hpp"

namespace concernkit {

inline constexpr std::size_t kDefaultMaxPassageLen = 1200;

enum class SourceKind { text, file, url };
std::string_view to_string(SourceKind kind) noexcept;
SourceKind source_kind_from_string(std::string_view s);

/// A segment of a document. `start`/`end` are byte offsets into the owning
/// document's UTF-8 `raw_text`; `text == raw_text.substr(start, end - start)`.
struct Passage {
  std::string passage_id;
  std::string doc_id;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;

  friend bool operator==(const Passage&, const Passage&) = default;
};

struct Document {
  std::string doc_id;
  SourceKind source = SourceKind::text;
  std::optional<std::string> url;
  std::optional<Date> published_at;
  std::optional<std::string> fetched_at;  // ISO-8601 UTC, url ingestion only
  std::string raw_text;
  std::vector<Passage> passages;

  friend bool operator==(const Document&, const Document&) = default;
};

struct DocumentMeta {
  std::optional<std::string> id;
  std::optional<std::string> url;
  std::optional<Date> date;
  SourceKind source = SourceKind::text;
};

/// Splits on blank-line paragraphs; paragraphs longer than `max_passage_len`
/// are packed greedily from whole sentences. Sentences that alone exceed the
/// limit are wrapped at whitespace. Offsets index `raw_text`.
std::vector<Passage> segment(std::string_view raw_text, std::size_t max_passage_len = kDefaultMaxPassageLen,
                             std::string_view doc_id = {});

/// Throws ValidationError("empty_input") when `body` is blank.
Document ingest_text(std::string body, const DocumentMeta& meta = {},
                     std::size_t max_passage_len = kDefaultMaxPassageLen);

enum class FileFormat { jsonl, csv, plain };
FileFormat file_format_from_string(std::string_view s);

struct SkippedRecord {
  std::size_t line = 0;  // 1-based line where the record starts
  std::string reason;
};

struct IngestSummary {
  std::size_t documents = 0;
  std::vector<SkippedRecord> skipped;
};

/// Streams records from `in`, calling `sink` once per Document. Malformed
/// records are skipped and reported; a CSV without a `text` column throws
/// FormatError("schema_error"). Memory use is bounded by the largest record.
IngestSummary ingest_stream(std::istream& in, FileFormat format, const std::function<void(Document&&)>& sink,
                            std::size_t max_passage_len = kDefaultMaxPassageLen);

struct IngestResult {
  std::vector<Document> documents;
  std::vector<SkippedRecord> skipped;
};

IngestResult ingest_file(std::string_view bytes, FileFormat format,
                         std::size_t max_passage_len = kDefaultMaxPassageLen);

// --- URL ingestion ---------------------------------------------------------

struct FetchOptions {
  std::chrono::milliseconds timeout{10'000};
  int retries = 2;
  std::size_t max_passage_len = kDefaultMaxPassageLen;
};

class FetchError : public Error {
 public:
  FetchError(std::string code, const std::string& message, int status = 0)
      : Error(std::move(code), message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

/// Fetches an http(s) page and ingests its main article text.
/// Errors: ValidationError("invalid_url"), FetchError("fetch_failed" |
/// "http_status" | "not_html" | "empty_extraction").
Document ingest_url(const std::string& url, const FetchOptions& options = {}, const DocumentMeta& meta = {});

/// Readability-style main content extraction. Returns paragraphs joined by
/// blank lines; empty when nothing readable remains.
std::string extract_main_text(std::string_view html);

// --- Corpus files -----------------------------------------------------------

nlohmann::ordered_json document_to_json(const Document& doc);
Document document_from_json(const nlohmann::json& j);

/// Reads a corpus JSONL file written by `write_corpus`.
std::vector<Document> read_corpus(std::istream& in);
void write_corpus(std::ostream& out, const std::vector<Document>& docs);

}  // namespace concernkit
