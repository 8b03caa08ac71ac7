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

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace concernkit::text {

/// Byte range [begin, end) into some source string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool empty() const noexcept { return begin == end; }
  friend bool operator==(const Span&, const Span&) = default;
};

bool is_space(char c) noexcept;

/// ASCII letters and digits, plus any byte >= 0x80 so UTF-8 words stay whole.
bool is_word_char(char c) noexcept;

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s) noexcept;

/// Span of `s` with leading and trailing whitespace removed (relative to `s`).
Span trim_span(std::string_view s, Span span) noexcept;

/// Lowercased word tokens (maximal runs of `is_word_char`).
std::vector<std::string> tokenize_words(std::string_view s);

/// Calls `fn(std::string_view token)` for each word token without lowercasing.
template <typename Fn>
void for_each_word(std::string_view s, Fn&& fn) {
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && !is_word_char(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && is_word_char(s[i])) ++i;
    if (i > start) fn(s.substr(start, i - start));
  }
}

/// Paragraph spans separated by blank lines (a line containing only
/// whitespace). Returned spans are trimmed and non-empty.
std::vector<Span> split_paragraphs(std::string_view s);

/// Sentence spans inside `range`: a sentence ends after a run of . ! ? (plus
/// closing quotes/brackets) that is followed by whitespace or end of range.
/// Spans are trimmed; gaps between them contain only whitespace.
std::vector<Span> split_sentences(std::string_view s, Span range);

/// Splits `range` into pieces of at most `max_len` bytes, preferring the last
/// whitespace before the limit and never cutting a UTF-8 sequence.
std::vector<Span> hard_wrap(std::string_view s, Span range, std::size_t max_len);

bool is_valid_utf8(std::string_view s) noexcept;

/// Appends the UTF-8 encoding of `codepoint` (invalid values become U+FFFD).
void append_utf8(std::string& out, char32_t codepoint);

/// Lowercased set of words read from a newline-separated list ('#' comments allowed).
std::unordered_set<std::string> parse_word_list(std::string_view contents);

/// Lowercased list of entries, in file order, from a newline-separated list.
std::vector<std::string> parse_list(std::string_view contents);

}  // namespace concernkit::text
