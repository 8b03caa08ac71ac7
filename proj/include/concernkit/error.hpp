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

#include <stdexcept>
#include <string>
#include <utility>

namespace concernkit {

/// Base class for every error raised by the library. `code()` is a stable
/// snake_case identifier that the HTTP service and CLI surface verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Caller supplied something that violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Taxonomy file failed validation. `node_id()` names the offending node.
class TaxonomyError : public ValidationError {
 public:
  TaxonomyError(std::string code, std::string node_id, const std::string& message)
      : ValidationError(std::move(code), message), node_id_(std::move(node_id)) {}

  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

/// Input bytes do not match the expected format.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format_error", message) {}
  FormatError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

/// Stored data failed checksum verification.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& message) : Error("integrity_error", message) {}
};

/// Artifact was produced under a different taxonomy or format version.
class VersionMismatchError : public Error {
 public:
  explicit VersionMismatchError(const std::string& message) : Error("version_mismatch", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

class NotFoundError : public Error {
 public:
  NotFoundError(std::string code, const std::string& message) : Error(std::move(code), message) {}
};

}  // namespace concernkit
