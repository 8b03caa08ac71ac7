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

#include <optional>
#include <string>

namespace concernkit {

struct HttpUrl {
  std::string base;  // "http://host:port"
  std::string path;  // "/path?query", fragment removed
};

/// Splits an http(s) URL for cpp-httplib. Returns nullopt for other schemes or
/// an empty/invalid authority.
std::optional<HttpUrl> parse_http_url(const std::string& url);

}  // namespace concernkit
