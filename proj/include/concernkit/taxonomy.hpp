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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace concernkit {

struct TaxonomyNode {
  std::string id;                         // dotted: "3" or "3.2"
  std::string name;
  std::string definition;                 // used verbatim in teacher prompts
  std::optional<std::string> parent_id;   // set iff id contains a dot
  bool placeholder = false;               // name/definition not yet curated

  bool is_parent() const noexcept { return !parent_id.has_value(); }
  friend bool operator==(const TaxonomyNode&, const TaxonomyNode&) = default;
};

/// Two-level concern hierarchy in canonical order (1, 1.1, 1.2, ..., 2, 2.1, ...).
/// Immutable after construction; safe to share between threads.
class Taxonomy {
 public:
  /// Validates and orders `nodes`. Throws TaxonomyError on the first invalid node.
  Taxonomy(std::string version, std::vector<TaxonomyNode> nodes, std::string label_prefix = "VaxConcerns");

  const std::string& version() const noexcept { return version_; }
  const std::string& label_prefix() const noexcept { return label_prefix_; }
  const std::vector<TaxonomyNode>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const TaxonomyNode& node(std::size_t index) const { return nodes_.at(index); }

  std::optional<std::size_t> index_of(std::string_view id) const;
  /// Like index_of but throws ValidationError("unknown_node").
  std::size_t require_index(std::string_view id) const;

  /// Canonical index of the parent of node `index`, or nullopt for parents.
  std::optional<std::size_t> parent_index(std::size_t index) const { return parent_index_.at(index); }

  std::vector<std::string> ids() const;
  std::size_t parent_count() const noexcept;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.version_ == b.version_ && a.label_prefix_ == b.label_prefix_ && a.nodes_ == b.nodes_;
  }

 private:
  std::string version_;
  std::string label_prefix_;
  std::vector<TaxonomyNode> nodes_;
  std::vector<std::optional<std::size_t>> parent_index_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// True iff `id` matches ^[1-9][0-9]*(\.[1-9][0-9]*)?$.
bool is_valid_node_id(std::string_view id) noexcept;

/// Orders dotted ids numerically component by component.
bool node_id_less(std::string_view a, std::string_view b) noexcept;

/// Parses the taxonomy file format (see docs/formats.md).
Taxonomy load_taxonomy(std::string_view source);
Taxonomy load_taxonomy_file(const std::string& path);
std::string serialize_taxonomy(const Taxonomy& taxonomy);
nlohmann::ordered_json taxonomy_to_json(const Taxonomy& taxonomy);

/// The bundled vaccine-concern taxonomy (24 nodes).
const Taxonomy& default_taxonomy();

/// Fixed-length vector of binary judgments aligned to a taxonomy's canonical order.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t size) : values_(size, 0) {}
  explicit LabelVector(std::vector<std::uint8_t> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  bool operator[](std::size_t i) const { return values_[i] != 0; }
  void set(std::size_t i, bool on = true) { values_.at(i) = on ? 1 : 0; }
  std::size_t count() const noexcept;
  bool any() const noexcept { return count() > 0; }
  const std::vector<std::uint8_t>& values() const noexcept { return values_; }

  /// Pointwise a <= b.
  bool is_subset_of(const LabelVector& other) const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<std::uint8_t> values_;
};

/// Sets every parent of a positive child. Idempotent and monotone.
LabelVector hierarchy_closure(const LabelVector& v, const Taxonomy& t);

/// Ids of positive entries in canonical order.
std::vector<std::string> label_set(const LabelVector& v, const Taxonomy& t);

/// Inverse of label_set. Throws ValidationError on unknown ids.
LabelVector labels_from_ids(const std::vector<std::string>& ids, const Taxonomy& t);

/// {"1": 0, "1.1": 1, ...} in canonical order.
nlohmann::ordered_json labels_to_json(const LabelVector& v, const Taxonomy& t);
LabelVector labels_from_json(const nlohmann::json& j, const Taxonomy& t);

}  // namespace concernkit
