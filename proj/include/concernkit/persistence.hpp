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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace concernkit {

/// Writes `bytes` to a temp file beside `path`, fsyncs it and renames it into
/// place, so readers observe either the old or the new content.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Checked files start with "ck1 sha256=<hex>\n" followed by the payload.
std::string wrap_checked(std::string_view payload);
/// Throws IntegrityError when the header is missing or the digest differs.
std::string unwrap_checked(std::string_view bytes, std::string_view what);

/// Single data directory holding content-addressed blobs and checksummed
/// JSON records grouped by collection.
///
///   <root>/blobs/ab/abcdef...      raw bytes, named by their SHA-256
///   <root>/records/<collection>/<id>.json
///
/// Every write is atomic. Safe for concurrent use from multiple threads.
class DataStore {
 public:
  explicit DataStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  /// Stores bytes once; returns the hex SHA-256 used as the address.
  std::string put_blob(std::string_view bytes);
  /// Throws NotFoundError("blob_not_found") or IntegrityError.
  std::string get_blob(const std::string& hash) const;
  bool has_blob(const std::string& hash) const;
  std::size_t blob_count() const;

  void put_record(std::string_view collection, std::string_view id, const nlohmann::json& value);
  /// nullopt when absent; IntegrityError when the checksum does not match.
  std::optional<nlohmann::json> get_record(std::string_view collection, std::string_view id) const;
  bool has_record(std::string_view collection, std::string_view id) const;
  /// Ids in lexicographic order.
  std::vector<std::string> list_records(std::string_view collection) const;

  std::filesystem::path record_path(std::string_view collection, std::string_view id) const;
  std::filesystem::path blob_path(const std::string& hash) const;

 private:
  std::filesystem::path root_;
};

/// Reversible file-name encoding for arbitrary record ids.
std::string encode_record_id(std::string_view id);
std::string decode_record_id(std::string_view name);

}  // namespace concernkit
