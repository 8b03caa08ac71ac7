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

#include "concernkit/text.hpp"

#include <algorithm>

namespace concernkit::text {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9') || u >= 0x80;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string_view trim(std::string_view s) noexcept {
  const Span sp = trim_span(s, {0, s.size()});
  return s.substr(sp.begin, sp.size());
}

Span trim_span(std::string_view s, Span span) noexcept {
  while (span.begin < span.end && is_space(s[span.begin])) ++span.begin;
  while (span.end > span.begin && is_space(s[span.end - 1])) --span.end;
  return span;
}

std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  for_each_word(s, [&](std::string_view w) { out.push_back(to_lower_ascii(w)); });
  return out;
}

std::vector<Span> split_paragraphs(std::string_view s) {
  std::vector<Span> out;
  std::size_t para_start = 0;
  std::size_t line_start = 0;
  auto flush = [&](std::size_t end) {
    const Span sp = trim_span(s, {para_start, end});
    if (!sp.empty()) out.push_back(sp);
  };
  while (line_start <= s.size()) {
    std::size_t nl = s.find('\n', line_start);
    const std::size_t line_end = nl == std::string_view::npos ? s.size() : nl;
    const bool blank = trim(s.substr(line_start, line_end - line_start)).empty();
    if (blank) {
      flush(line_start);
      para_start = line_end;
    }
    if (nl == std::string_view::npos) break;
    line_start = nl + 1;
  }
  flush(s.size());
  return out;
}

std::vector<Span> split_sentences(std::string_view s, Span range) {
  std::vector<Span> out;
  std::size_t start = range.begin;
  std::size_t i = range.begin;
  auto is_terminal = [](char c) { return c == '.' || c == '!' || c == '?'; };
  auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };
  while (i < range.end) {
    if (!is_terminal(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < range.end && is_terminal(s[j])) ++j;
    while (j < range.end && is_closer(s[j])) ++j;
    if (j == range.end || is_space(s[j])) {
      const Span sp = trim_span(s, {start, j});
      if (!sp.empty()) out.push_back(sp);
      start = j;
    }
    i = j;
  }
  const Span tail = trim_span(s, {start, range.end});
  if (!tail.empty()) out.push_back(tail);
  return out;
}

std::vector<Span> hard_wrap(std::string_view s, Span range, std::size_t max_len) {
  std::vector<Span> out;
  range = trim_span(s, range);
  while (!range.empty()) {
    if (range.size() <= max_len) {
      out.push_back(range);
      break;
    }
    std::size_t cut = range.begin + max_len;
    // prefer the last whitespace inside the window
    std::size_t ws = cut;
    while (ws > range.begin && !is_space(s[ws])) --ws;
    if (ws > range.begin) {
      cut = ws;
    } else {
      // no whitespace: back off to a UTF-8 lead byte
      while (cut > range.begin + 1 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
    }
    const Span piece = trim_span(s, {range.begin, cut});
    if (!piece.empty()) out.push_back(piece);
    range = trim_span(s, {cut, range.end});
  }
  return out;
}

bool is_valid_utf8(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong, surrogate and out-of-range forms
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
    if ((cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) return false;
    i += len;
  }
  return true;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp == 0) cp = 0xFFFD;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::vector<std::string> parse_list(std::string_view contents) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = trim(contents.substr(pos, nl - pos));
    if (!line.empty() && line.front() != '#') out.push_back(to_lower_ascii(line));
    pos = nl + 1;
  }
  return out;
}

std::unordered_set<std::string> parse_word_list(std::string_view contents) {
  auto list = parse_list(contents);
  return {std::make_move_iterator(list.begin()), std::make_move_iterator(list.end())};
}

}  // namespace concernkit::text
