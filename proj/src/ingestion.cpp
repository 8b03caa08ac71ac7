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

#include "concernkit/ingestion.hpp"

#include <ctime>
#include <sstream>
#include <thread>

#include "concernkit/hash.hpp"
#include "concernkit/http_util.hpp"
#include "concernkit/text.hpp"
#include "httplib.h"

namespace concernkit {

std::string_view to_string(SourceKind kind) noexcept {
  switch (kind) {
    case SourceKind::text: return "text";
    case SourceKind::file: return "file";
    case SourceKind::url: return "url";
  }
  return "text";
}

SourceKind source_kind_from_string(std::string_view s) {
  if (s == "text") return SourceKind::text;
  if (s == "file") return SourceKind::file;
  if (s == "url") return SourceKind::url;
  throw ValidationError("invalid_source", "unknown document source '" + std::string(s) + "'");
}

FileFormat file_format_from_string(std::string_view s) {
  if (s == "jsonl") return FileFormat::jsonl;
  if (s == "csv") return FileFormat::csv;
  if (s == "plain" || s == "txt") return FileFormat::plain;
  throw ValidationError("invalid_format", "unknown file format '" + std::string(s) + "' (expected jsonl, csv or plain)");
}

std::vector<Passage> segment(std::string_view raw_text, std::size_t max_passage_len, std::string_view doc_id) {
  if (max_passage_len == 0) throw ValidationError("invalid_argument", "max_passage_len must be >= 1");
  std::vector<text::Span> spans;
  for (const auto& para : text::split_paragraphs(raw_text)) {
    if (para.size() <= max_passage_len) {
      spans.push_back(para);
      continue;
    }
    std::vector<text::Span> pieces;
    for (const auto& sentence : text::split_sentences(raw_text, para)) {
      if (sentence.size() <= max_passage_len) {
        pieces.push_back(sentence);
      } else {
        auto wrapped = text::hard_wrap(raw_text, sentence, max_passage_len);
        pieces.insert(pieces.end(), wrapped.begin(), wrapped.end());
      }
    }
    text::Span current = pieces.front();
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      if (pieces[i].end - current.begin <= max_passage_len) {
        current.end = pieces[i].end;
      } else {
        spans.push_back(current);
        current = pieces[i];
      }
    }
    spans.push_back(current);
  }

  std::vector<Passage> out;
  out.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    Passage p;
    p.doc_id = std::string(doc_id);
    p.passage_id = std::string(doc_id) + ":p" + std::to_string(i);
    p.start = spans[i].begin;
    p.end = spans[i].end;
    p.text = std::string(raw_text.substr(p.start, p.end - p.start));
    out.push_back(std::move(p));
  }
  return out;
}

Document ingest_text(std::string body, const DocumentMeta& meta, std::size_t max_passage_len) {
  if (text::trim(body).empty()) throw ValidationError("empty_input", "input text is empty");
  if (!text::is_valid_utf8(body)) throw ValidationError("invalid_utf8", "input text is not valid UTF-8");
  Document doc;
  doc.doc_id = meta.id ? *meta.id : "doc-" + sha256_hex(body).substr(0, 16);
  doc.source = meta.source;
  doc.url = meta.url;
  doc.published_at = meta.date;
  doc.raw_text = std::move(body);
  doc.passages = segment(doc.raw_text, max_passage_len, doc.doc_id);
  return doc;
}

namespace {

// Reads one CSV record (RFC 4180: quoted fields may contain separators,
// doubled quotes and newlines). Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line, bool& malformed) {
  fields.clear();
  malformed = false;
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char c;
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && in.peek() == '\n') in.get(c);
      ++line;
      fields.push_back(std::move(field));
      return true;
    } else {
      if (c == '"') malformed = true;  // stray quote inside unquoted field
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) malformed = true;  // unterminated quote at EOF
  fields.push_back(std::move(field));
  return true;
}

std::optional<Document> make_record_document(std::string text_body, const std::optional<std::string>& id,
                                             const std::optional<std::string>& url, const std::string& date,
                                             std::size_t line, std::size_t max_len, std::string& reason) {
  if (!text::is_valid_utf8(text_body)) {
    reason = "text is not valid UTF-8";
    return std::nullopt;
  }
  if (text::trim(text_body).empty()) {
    reason = "empty text";
    return std::nullopt;
  }
  DocumentMeta meta;
  meta.source = SourceKind::file;
  meta.url = url;
  if (!date.empty()) {
    meta.date = Date::parse(date);
    if (!meta.date) {
      reason = "invalid date '" + date + "' (expected YYYY-MM-DD)";
      return std::nullopt;
    }
  }
  meta.id = id ? *id : "doc-" + sha256_hex(text_body).substr(0, 12) + "-L" + std::to_string(line);
  return ingest_text(std::move(text_body), meta, max_len);
}

}  // namespace

IngestSummary ingest_stream(std::istream& in, FileFormat format, const std::function<void(Document&&)>& sink,
                            std::size_t max_passage_len) {
  IngestSummary summary;
  auto emit = [&](Document&& d) {
    sink(std::move(d));
    ++summary.documents;
  };

  if (format == FileFormat::plain) {
    std::ostringstream ss;
    ss << in.rdbuf();
    DocumentMeta meta;
    meta.source = SourceKind::file;
    emit(ingest_text(ss.str(), meta, max_passage_len));
    return summary;
  }

  if (format == FileFormat::jsonl) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (text::trim(line).empty()) continue;
      std::string reason;
      try {
        auto j = nlohmann::json::parse(line);
        if (!j.is_object()) throw std::runtime_error("record is not a JSON object");
        if (!j.contains("text") || !j["text"].is_string()) throw std::runtime_error("missing required string field 'text'");
        std::optional<std::string> id, url;
        std::string date;
        if (j.contains("id") && !j["id"].is_null()) id = j["id"].get<std::string>();
        if (j.contains("url") && !j["url"].is_null()) url = j["url"].get<std::string>();
        if (j.contains("date") && !j["date"].is_null()) date = j["date"].get<std::string>();
        auto doc = make_record_document(j["text"].get<std::string>(), id, url, date, lineno, max_passage_len, reason);
        if (doc) {
          emit(std::move(*doc));
          continue;
        }
      } catch (const std::exception& e) {
        reason = e.what();
      }
      summary.skipped.push_back({lineno, reason});
    }
    return summary;
  }

  // csv
  std::vector<std::string> header;
  std::size_t line = 1;
  bool malformed = false;
  if (!read_csv_record(in, header, line, malformed) || malformed) {
    throw FormatError("schema_error", "CSV input has no readable header row");
  }
  int text_col = -1, id_col = -1, url_col = -1, date_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = text::to_lower_ascii(text::trim(header[i]));
    if (name == "text") text_col = static_cast<int>(i);
    if (name == "id") id_col = static_cast<int>(i);
    if (name == "url") url_col = static_cast<int>(i);
    if (name == "date") date_col = static_cast<int>(i);
  }
  if (text_col < 0) throw FormatError("schema_error", "CSV header lacks the required 'text' column");

  std::vector<std::string> fields;
  while (true) {
    const std::size_t record_line = line;
    if (!read_csv_record(in, fields, line, malformed)) break;
    if (fields.size() == 1 && text::trim(fields[0]).empty()) continue;
    if (malformed) {
      summary.skipped.push_back({record_line, "malformed quoting"});
      continue;
    }
    if (fields.size() != header.size()) {
      summary.skipped.push_back({record_line, "expected " + std::to_string(header.size()) + " fields, got " +
                                                  std::to_string(fields.size())});
      continue;
    }
    auto opt = [&](int col) -> std::optional<std::string> {
      if (col < 0 || fields[static_cast<std::size_t>(col)].empty()) return std::nullopt;
      return fields[static_cast<std::size_t>(col)];
    };
    std::string reason;
    try {
      auto doc = make_record_document(fields[static_cast<std::size_t>(text_col)], opt(id_col), opt(url_col),
                                      opt(date_col).value_or(""), record_line, max_passage_len, reason);
      if (doc) {
        emit(std::move(*doc));
        continue;
      }
    } catch (const std::exception& e) {
      reason = e.what();
    }
    summary.skipped.push_back({record_line, reason});
  }
  return summary;
}

IngestResult ingest_file(std::string_view bytes, FileFormat format, std::size_t max_passage_len) {
  IngestResult result;
  std::istringstream in{std::string(bytes)};
  auto summary = ingest_stream(
      in, format, [&](Document&& d) { result.documents.push_back(std::move(d)); }, max_passage_len);
  result.skipped = std::move(summary.skipped);
  return result;
}

namespace {

std::string utc_now_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::optional<HttpUrl> parse_http_url(const std::string& url) {
  std::string scheme;
  if (url.rfind("http://", 0) == 0) {
    scheme = "http://";
  } else if (url.rfind("https://", 0) == 0) {
    scheme = "https://";
  } else {
    return std::nullopt;
  }
  const std::string rest = url.substr(scheme.size());
  const auto slash = rest.find_first_of("/?#");
  const std::string authority = rest.substr(0, slash);
  if (authority.empty() || authority.find_first_of(" \t\r\n@") != std::string::npos) return std::nullopt;
  std::string path = slash == std::string::npos ? "/" : rest.substr(slash);
  if (const auto hash = path.find('#'); hash != std::string::npos) path.erase(hash);
  if (path.empty() || path.front() != '/') path.insert(path.begin(), '/');
  return HttpUrl{scheme + authority, path};
}

Document ingest_url(const std::string& url, const FetchOptions& options, const DocumentMeta& meta) {
  auto parsed = parse_http_url(url);
  if (!parsed) throw ValidationError("invalid_url", "not a valid http(s) URL: '" + url + "'");

  httplib::Client client(parsed->base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);

  httplib::Result res{nullptr, httplib::Error::Unknown};
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    res = client.Get(parsed->path);
    // retry transport errors and 5xx only
    if (res && res->status < 500) break;
    if (attempt < options.retries) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
  }
  if (!res) {
    throw FetchError("fetch_failed", "fetching '" + url + "' failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw FetchError("http_status", "fetching '" + url + "' returned HTTP " + std::to_string(res->status),
                     res->status);
  }
  const std::string content_type = text::to_lower_ascii(res->get_header_value("Content-Type"));
  if (content_type.find("text/html") == std::string::npos &&
      content_type.find("application/xhtml+xml") == std::string::npos) {
    throw FetchError("not_html", "'" + url + "' has content type '" + content_type + "', expected HTML",
                     res->status);
  }
  std::string body = extract_main_text(res->body);
  if (text::trim(body).empty()) {
    throw FetchError("empty_extraction", "no readable article text found at '" + url + "'", res->status);
  }
  DocumentMeta m = meta;
  m.source = SourceKind::url;
  m.url = url;
  Document doc = ingest_text(std::move(body), m, options.max_passage_len);
  doc.fetched_at = utc_now_iso8601();
  return doc;
}

nlohmann::ordered_json document_to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["source"] = to_string(doc.source);
  j["url"] = doc.url ? nlohmann::ordered_json(*doc.url) : nlohmann::ordered_json(nullptr);
  j["date"] = doc.published_at ? nlohmann::ordered_json(doc.published_at->to_string()) : nlohmann::ordered_json(nullptr);
  if (doc.fetched_at) j["fetched_at"] = *doc.fetched_at;
  j["raw_text"] = doc.raw_text;
  nlohmann::ordered_json passages = nlohmann::ordered_json::array();
  for (const auto& p : doc.passages) {
    nlohmann::ordered_json pj;
    pj["passage_id"] = p.passage_id;
    pj["start"] = p.start;
    pj["end"] = p.end;
    passages.push_back(std::move(pj));
  }
  j["passages"] = std::move(passages);
  return j;
}

Document document_from_json(const nlohmann::json& j) {
  Document doc;
  try {
    doc.doc_id = j.at("doc_id").get<std::string>();
    doc.source = source_kind_from_string(j.value("source", std::string("text")));
    if (j.contains("url") && !j["url"].is_null()) doc.url = j["url"].get<std::string>();
    if (j.contains("date") && !j["date"].is_null()) {
      doc.published_at = Date::parse(j["date"].get<std::string>());
      if (!doc.published_at) throw FormatError("invalid date in document '" + doc.doc_id + "'");
    }
    if (j.contains("fetched_at")) doc.fetched_at = j["fetched_at"].get<std::string>();
    doc.raw_text = j.at("raw_text").get<std::string>();
    std::size_t prev_end = 0;
    for (const auto& pj : j.at("passages")) {
      Passage p;
      p.doc_id = doc.doc_id;
      p.passage_id = pj.at("passage_id").get<std::string>();
      p.start = pj.at("start").get<std::size_t>();
      p.end = pj.at("end").get<std::size_t>();
      if (p.start < prev_end || p.end <= p.start || p.end > doc.raw_text.size()) {
        throw FormatError("passage offsets out of order or out of bounds in document '" + doc.doc_id + "'");
      }
      prev_end = p.end;
      p.text = doc.raw_text.substr(p.start, p.end - p.start);
      doc.passages.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed document record: ") + e.what());
  }
  return doc;
}

std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      docs.push_back(document_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return docs;
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

}  // namespace concernkit
