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

// Main-content extraction for scraped pages. Builds a tolerant element tree,
// drops boilerplate subtrees, scores containers by the amount of non-link
// paragraph text they hold and linearizes the best one into paragraphs.

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "concernkit/ingestion.hpp"
#include "concernkit/text.hpp"

namespace concernkit {

namespace {

struct Node {
  std::string tag;   // empty for text nodes
  std::string text;  // decoded text for text nodes
  std::string class_and_id;
  Node* parent = nullptr;
  std::vector<std::unique_ptr<Node>> children;
};

bool in_list(std::string_view tag, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), tag) != list.end();
}

bool is_void(std::string_view tag) {
  return in_list(tag, {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param", "source",
                       "track", "wbr"});
}

bool is_raw_text(std::string_view tag) { return in_list(tag, {"script", "style", "textarea", "noscript", "template"}); }

bool is_boilerplate_tag(std::string_view tag) {
  return in_list(tag, {"script", "style", "noscript", "template", "head", "nav", "header", "footer", "aside", "form",
                       "iframe", "svg", "button", "select", "textarea", "menu", "dialog"});
}

bool is_boilerplate_attr(std::string_view attrs) {
  static constexpr std::array<std::string_view, 16> kHints = {
      "nav",     "menu",       "footer", "sidebar", "comment", "cookie",    "banner", "share",
      "advert",  "breadcrumb", "social", "related", "promo",   "subscribe", "popup",  "masthead"};
  return std::any_of(kHints.begin(), kHints.end(), [&](std::string_view h) { return attrs.find(h) != std::string_view::npos; });
}

bool is_paragraph_block(std::string_view tag) {
  return in_list(tag, {"p", "pre", "blockquote", "li", "td", "dd", "h1", "h2", "h3", "h4", "h5", "h6", "figcaption"});
}

bool is_block(std::string_view tag) {
  return is_paragraph_block(tag) ||
         in_list(tag, {"div", "section", "article", "main", "body", "html", "ul", "ol", "table", "tr", "tbody", "thead",
                       "dl", "dt", "figure", "hr", "br"});
}

void decode_entities_into(std::string_view s, std::string& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    std::string_view name = s.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    if (!name.empty() && name[0] == '#') {
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      const std::string_view digits = name.substr(hex ? 2 : 1);
      bool ok = !digits.empty();
      for (char c : digits) {
        int v = -1;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
        if (v < 0 || cp > 0x10FFFF) {
          ok = false;
          break;
        }
        cp = cp * (hex ? 16 : 10) + static_cast<char32_t>(v);
      }
      if (!ok) {
        out.push_back(s[i++]);
        continue;
      }
    } else {
      static constexpr std::pair<std::string_view, char32_t> kNamed[] = {
          {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},     {"apos", '\''},
          {"nbsp", ' '},     {"mdash", 0x2014}, {"ndash", 0x2013}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
          {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"hellip", 0x2026}, {"copy", 0xA9},   {"reg", 0xAE},
          {"deg", 0xB0},     {"eacute", 0xE9},  {"egrave", 0xE8},  {"ecirc", 0xEA},   {"euml", 0xEB},
          {"aacute", 0xE1},  {"agrave", 0xE0},  {"acirc", 0xE2},   {"auml", 0xE4},    {"aring", 0xE5},
          {"iacute", 0xED},  {"iuml", 0xEF},    {"oacute", 0xF3},  {"ocirc", 0xF4},   {"ouml", 0xF6},
          {"uacute", 0xFA},  {"ucirc", 0xFB},   {"uuml", 0xFC},    {"ccedil", 0xE7},  {"ntilde", 0xF1},
          {"szlig", 0xDF},   {"Eacute", 0xC9},  {"Auml", 0xC4},    {"Ouml", 0xD6},    {"Uuml", 0xDC}};
      for (const auto& [n, v] : kNamed) {
        if (n == name) cp = v;
      }
      if (cp == 0) {
        out.push_back(s[i++]);
        continue;
      }
    }
    text::append_utf8(out, cp);
    i = semi + 1;
  }
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view html) : html_(html) {
    root_ = std::make_unique<Node>();
    root_->tag = "#root";
    current_ = root_.get();
  }

  std::unique_ptr<Node> build() {
    std::size_t i = 0;
    while (i < html_.size()) {
      if (html_[i] == '<') {
        i = parse_markup(i);
      } else {
        const auto next = html_.find('<', i);
        const std::size_t end = next == std::string_view::npos ? html_.size() : next;
        add_text(html_.substr(i, end - i));
        i = end;
      }
    }
    return std::move(root_);
  }

 private:
  std::size_t parse_markup(std::size_t i) {
    if (html_.compare(i, 4, "<!--") == 0) {
      const auto end = html_.find("-->", i + 4);
      return end == std::string_view::npos ? html_.size() : end + 3;
    }
    if (i + 1 < html_.size() && (html_[i + 1] == '!' || html_[i + 1] == '?')) {
      const auto end = html_.find('>', i);
      return end == std::string_view::npos ? html_.size() : end + 1;
    }
    const bool closing = i + 1 < html_.size() && html_[i + 1] == '/';
    std::size_t j = i + (closing ? 2 : 1);
    const std::size_t name_start = j;
    while (j < html_.size() && (std::isalnum(static_cast<unsigned char>(html_[j])) || html_[j] == '-')) ++j;
    if (j == name_start) {
      add_text(html_.substr(i, 1));
      return i + 1;
    }
    const std::string tag = text::to_lower_ascii(html_.substr(name_start, j - name_start));

    // scan attributes to the closing '>' honoring quotes
    std::size_t k = j;
    char quote = 0;
    while (k < html_.size()) {
      const char c = html_[k];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        break;
      }
      ++k;
    }
    const std::string_view attrs = html_.substr(j, k - j);
    const std::size_t after = k < html_.size() ? k + 1 : html_.size();

    if (closing) {
      close(tag);
      return after;
    }
    auto node = std::make_unique<Node>();
    node->tag = tag;
    node->class_and_id = extract_class_and_id(attrs);
    node->parent = current_;
    Node* raw = node.get();

    // implicit end tags for the common unclosed cases
    if ((tag == "p" || tag == "li") && current_->tag == tag) close(tag);
    raw->parent = current_;
    current_->children.push_back(std::move(node));

    const bool self_closing = !attrs.empty() && attrs.back() == '/';
    if (is_void(tag) || self_closing) return after;
    if (is_raw_text(tag)) {
      const std::string close_tag = "</" + tag;
      std::size_t end = after;
      while (end < html_.size()) {
        end = html_.find("</", end);
        if (end == std::string_view::npos) return html_.size();
        if (text::to_lower_ascii(html_.substr(end, close_tag.size())) == close_tag) break;
        end += 2;
      }
      const auto gt = html_.find('>', end);
      return gt == std::string_view::npos ? html_.size() : gt + 1;
    }
    current_ = raw;
    return after;
  }

  static std::string extract_class_and_id(std::string_view attrs) {
    std::string lower = text::to_lower_ascii(attrs);
    std::string out;
    for (std::string_view key : {"class", "id", "role"}) {
      std::size_t pos = 0;
      while ((pos = lower.find(key, pos)) != std::string::npos) {
        std::size_t p = pos + key.size();
        const bool boundary = pos == 0 || text::is_space(lower[pos - 1]);
        while (p < lower.size() && text::is_space(lower[p])) ++p;
        if (boundary && p < lower.size() && lower[p] == '=') {
          ++p;
          while (p < lower.size() && text::is_space(lower[p])) ++p;
          const char q = p < lower.size() ? lower[p] : 0;
          std::size_t end;
          if (q == '"' || q == '\'') {
            end = lower.find(q, p + 1);
            ++p;
          } else {
            end = lower.find_first_of(" \t\r\n>", p);
          }
          if (end == std::string::npos) end = lower.size();
          out.append(lower, p, end - p);
          out.push_back(' ');
        }
        pos += key.size();
      }
    }
    return out;
  }

  void close(const std::string& tag) {
    for (Node* n = current_; n && n != root_.get(); n = n->parent) {
      if (n->tag == tag) {
        current_ = n->parent;
        return;
      }
    }
  }

  void add_text(std::string_view raw) {
    auto node = std::make_unique<Node>();
    decode_entities_into(raw, node->text);
    node->parent = current_;
    current_->children.push_back(std::move(node));
  }

  std::string_view html_;
  std::unique_ptr<Node> root_;
  Node* current_ = nullptr;
};

// The h1 headline repeats the page title and is left out of the body text.
bool skipped(const Node& n) {
  return !n.tag.empty() && (is_boilerplate_tag(n.tag) || n.tag == "h1" || is_boilerplate_attr(n.class_and_id));
}

void collect_text(const Node& n, std::string& out, std::size_t& link_chars, bool in_link) {
  if (n.tag.empty()) {
    out += n.text;
    if (in_link) link_chars += n.text.size();
    return;
  }
  if (skipped(n)) return;
  for (const auto& c : n.children) collect_text(*c, out, link_chars, in_link || n.tag == "a");
  if (is_block(n.tag)) out.push_back(' ');
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (text::is_space(c)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

// Each paragraph-level block credits its parent fully and grandparent by half.
void score_containers(const Node& n, std::vector<std::pair<const Node*, double>>& scores) {
  if (n.tag.empty() || skipped(n)) return;
  if (is_paragraph_block(n.tag) && n.parent) {
    std::string t;
    std::size_t link_chars = 0;
    collect_text(n, t, link_chars, false);
    const std::string collapsed = collapse_whitespace(t);
    if (collapsed.size() >= 20) {
      const double density = t.empty() ? 0.0 : static_cast<double>(link_chars) / static_cast<double>(t.size());
      const double s = static_cast<double>(collapsed.size()) * (1.0 - density);
      auto credit = [&](const Node* target, double amount) {
        for (auto& [node, score] : scores) {
          if (node == target) {
            score += amount;
            return;
          }
        }
        scores.emplace_back(target, amount);
      };
      credit(n.parent, s);
      if (n.parent->parent) credit(n.parent->parent, s / 2);
    }
  }
  for (const auto& c : n.children) score_containers(*c, scores);
}

void linearize(const Node& n, std::string& buffer, std::vector<std::string>& paragraphs) {
  auto flush = [&] {
    std::string p = collapse_whitespace(buffer);
    if (!p.empty()) paragraphs.push_back(std::move(p));
    buffer.clear();
  };
  if (n.tag.empty()) {
    buffer += n.text;
    return;
  }
  if (skipped(n)) return;
  const bool block = is_block(n.tag) && n.tag != "br";
  if (block) flush();
  if (n.tag == "br") buffer.push_back(' ');
  for (const auto& c : n.children) linearize(*c, buffer, paragraphs);
  if (block) flush();
}

}  // namespace

std::string extract_main_text(std::string_view html) {
  const auto root = TreeBuilder(html).build();

  std::vector<std::pair<const Node*, double>> scores;
  score_containers(*root, scores);
  const Node* best = root.get();
  double best_score = 0.0;
  for (const auto& [node, score] : scores) {
    if (score > best_score) {
      best = node;
      best_score = score;
    }
  }

  std::string buffer;
  std::vector<std::string> paragraphs;
  linearize(*best, buffer, paragraphs);
  std::string p = collapse_whitespace(buffer);
  if (!p.empty()) paragraphs.push_back(std::move(p));

  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out += "\n\n";
    out += paragraphs[i];
  }
  return out;
}

}  // namespace concernkit
