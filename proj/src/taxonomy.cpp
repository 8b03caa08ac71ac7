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

#include "concernkit/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "concernkit/error.hpp"
#include "concernkit/text.hpp"

namespace concernkit {

namespace embedded {
extern const std::string_view kDefaultTaxonomy;
}

namespace {

bool parse_component(std::string_view s, std::uint64_t& out) noexcept {
  if (s.empty() || s.front() < '1' || s.front() > '9' || s.size() > 9) return false;
  out = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    out = out * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return true;
}

}  // namespace

bool is_valid_node_id(std::string_view id) noexcept {
  const auto dot = id.find('.');
  std::uint64_t v = 0;
  if (dot == std::string_view::npos) return parse_component(id, v);
  return parse_component(id.substr(0, dot), v) && parse_component(id.substr(dot + 1), v);
}

bool node_id_less(std::string_view a, std::string_view b) noexcept {
  auto split = [](std::string_view s) {
    const auto dot = s.find('.');
    std::uint64_t major = 0, minor = 0;
    parse_component(s.substr(0, dot), major);
    if (dot != std::string_view::npos) parse_component(s.substr(dot + 1), minor);
    return std::pair{major, minor};
  };
  const auto ka = split(a);
  const auto kb = split(b);
  if (ka != kb) return ka < kb;
  return a < b;
}

Taxonomy::Taxonomy(std::string version, std::vector<TaxonomyNode> nodes, std::string label_prefix)
    : version_(std::move(version)), label_prefix_(std::move(label_prefix)), nodes_(std::move(nodes)) {
  if (version_.empty()) throw TaxonomyError("missing_version", "", "taxonomy version string is required");
  if (nodes_.empty()) throw TaxonomyError("empty_taxonomy", "", "taxonomy has no nodes");

  for (auto& n : nodes_) {
    if (!is_valid_node_id(n.id)) throw TaxonomyError("malformed_id", n.id, "malformed node id '" + n.id + "'");
    if (text::trim(n.definition).empty()) {
      throw TaxonomyError("empty_definition", n.id, "node '" + n.id + "' has an empty definition");
    }
    const auto dot = n.id.find('.');
    std::optional<std::string> derived;
    if (dot != std::string::npos) derived = n.id.substr(0, dot);
    if (n.parent_id && n.parent_id != derived) {
      throw TaxonomyError("parent_mismatch", n.id,
                          "node '" + n.id + "' declares parent '" + *n.parent_id + "' inconsistent with its id");
    }
    n.parent_id = derived;
  }

  std::stable_sort(nodes_.begin(), nodes_.end(),
                   [](const TaxonomyNode& a, const TaxonomyNode& b) { return node_id_less(a.id, b.id); });

  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      throw TaxonomyError("duplicate_id", nodes_[i].id, "duplicate node id '" + nodes_[i].id + "'");
    }
  }
  parent_index_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].parent_id) continue;
    auto it = index_.find(*nodes_[i].parent_id);
    if (it == index_.end()) {
      throw TaxonomyError("missing_parent", nodes_[i].id,
                          "node '" + nodes_[i].id + "' references missing parent '" + *nodes_[i].parent_id + "'");
    }
    parent_index_[i] = it->second;
  }
}

std::optional<std::size_t> Taxonomy::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Taxonomy::require_index(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw ValidationError("unknown_node", "unknown taxonomy node '" + std::string(id) + "'");
  return *idx;
}

std::vector<std::string> Taxonomy::ids() const {
  std::vector<std::string> out;
  out.reserve(nodes_.size());
  for (const auto& n : nodes_) out.push_back(n.id);
  return out;
}

std::size_t Taxonomy::parent_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TaxonomyNode& n) { return n.is_parent(); }));
}

Taxonomy load_taxonomy(std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(source);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("taxonomy_format", std::string("taxonomy is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array()) {
    throw FormatError("taxonomy_format", "taxonomy must be an object with a 'nodes' array");
  }
  if (!j.contains("version") || !j["version"].is_string()) {
    throw TaxonomyError("missing_version", "", "taxonomy version string is required");
  }
  std::vector<TaxonomyNode> nodes;
  for (const auto& rec : j["nodes"]) {
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string()) {
      throw FormatError("taxonomy_format", "every node needs a string 'id'");
    }
    TaxonomyNode n;
    n.id = rec["id"].get<std::string>();
    n.name = rec.value("name", std::string{});
    n.definition = rec.value("definition", std::string{});
    if (rec.contains("parent") && !rec["parent"].is_null()) n.parent_id = rec["parent"].get<std::string>();
    n.placeholder = rec.value("placeholder", false);
    nodes.push_back(std::move(n));
  }
  return Taxonomy(j["version"].get<std::string>(), std::move(nodes), j.value("label_prefix", std::string("VaxConcerns")));
}

Taxonomy load_taxonomy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open taxonomy file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_taxonomy(ss.str());
}

nlohmann::ordered_json taxonomy_to_json(const Taxonomy& taxonomy) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (const auto& n : taxonomy.nodes()) {
    nlohmann::ordered_json rec;
    rec["id"] = n.id;
    rec["name"] = n.name;
    rec["definition"] = n.definition;
    if (n.parent_id) rec["parent"] = *n.parent_id;
    if (n.placeholder) rec["placeholder"] = true;
    nodes.push_back(std::move(rec));
  }
  nlohmann::ordered_json j;
  j["format"] = "concern-taxonomy";
  j["version"] = taxonomy.version();
  j["label_prefix"] = taxonomy.label_prefix();
  j["nodes"] = std::move(nodes);
  return j;
}

std::string serialize_taxonomy(const Taxonomy& taxonomy) { return taxonomy_to_json(taxonomy).dump(2) + "\n"; }

const Taxonomy& default_taxonomy() {
  static const Taxonomy t = load_taxonomy(embedded::kDefaultTaxonomy);
  return t;
}

LabelVector::LabelVector(std::vector<std::uint8_t> values) : values_(std::move(values)) {
  for (auto v : values_) {
    if (v > 1) throw ValidationError("non_binary_label", "label vectors must contain only 0/1");
  }
}

std::size_t LabelVector::count() const noexcept {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

bool LabelVector::is_subset_of(const LabelVector& other) const {
  if (other.size() != size()) throw ValidationError("length_mismatch", "label vector length mismatch");
  for (std::size_t i = 0; i < size(); ++i) {
    if (values_[i] > other.values_[i]) return false;
  }
  return true;
}

namespace {
void require_aligned(const LabelVector& v, const Taxonomy& t) {
  if (v.size() != t.size()) {
    throw ValidationError("length_mismatch", "label vector has " + std::to_string(v.size()) +
                                                 " entries but taxonomy '" + t.version() + "' has " +
                                                 std::to_string(t.size()));
  }
}
}  // namespace

LabelVector hierarchy_closure(const LabelVector& v, const Taxonomy& t) {
  require_aligned(v, t);
  LabelVector out = v;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (v[i]) {
      if (auto p = t.parent_index(i)) out.set(*p);
    }
  }
  return out;
}

std::vector<std::string> label_set(const LabelVector& v, const Taxonomy& t) {
  require_aligned(v, t);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (v[i]) out.push_back(t.node(i).id);
  }
  return out;
}

LabelVector labels_from_ids(const std::vector<std::string>& ids, const Taxonomy& t) {
  LabelVector v(t.size());
  for (const auto& id : ids) v.set(t.require_index(id));
  return v;
}

nlohmann::ordered_json labels_to_json(const LabelVector& v, const Taxonomy& t) {
  require_aligned(v, t);
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < t.size(); ++i) j[t.node(i).id] = v[i] ? 1 : 0;
  return j;
}

LabelVector labels_from_json(const nlohmann::json& j, const Taxonomy& t) {
  if (j.is_array()) {
    std::vector<std::string> ids;
    for (const auto& e : j) {
      if (!e.is_string()) throw FormatError("labels array must contain node id strings");
      ids.push_back(e.get<std::string>());
    }
    return labels_from_ids(ids, t);
  }
  if (!j.is_object()) throw FormatError("labels must be an object {node_id: 0/1} or an array of ids");
  LabelVector v(t.size());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::size_t idx = t.require_index(it.key());
    const auto& val = it.value();
    if (!val.is_number_integer() || (val.get<int>() != 0 && val.get<int>() != 1)) {
      if (val.is_boolean()) {
        v.set(idx, val.get<bool>());
        continue;
      }
      throw FormatError("label '" + it.key() + "' is not 0/1");
    }
    v.set(idx, val.get<int>() == 1);
  }
  return v;
}

}  // namespace concernkit
