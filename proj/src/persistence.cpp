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

#include "concernkit/persistence.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "concernkit/error.hpp"
#include "concernkit/hash.hpp"

namespace fs = std::filesystem;

namespace concernkit {

namespace {

constexpr std::string_view kTempMarker = ".tmp-";
constexpr std::string_view kCheckedPrefix = "ck1 sha256=";

std::string temp_name(const fs::path& target) {
  static std::atomic<unsigned long> counter{0};
  std::ostringstream os;
  os << target.filename().string() << kTempMarker << ::getpid() << '-'
     << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '-' << counter.fetch_add(1);
  return os.str();
}

void fsync_path(const fs::path& p, int flags) {
  const int fd = ::open(p.c_str(), flags);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.parent_path() / temp_name(path);
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot create '" + tmp.string() + "': " + std::strerror(errno));
  std::size_t written = 0;
  while (written < bytes.size()) {
    const auto n = ::write(fd, bytes.data() + written, bytes.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = std::strerror(errno);
      ::close(fd);
      fs::remove(tmp, ec);
      throw IoError("write to '" + tmp.string() + "' failed: " + err);
    }
    written += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
  fsync_path(path.parent_path(), O_RDONLY | O_DIRECTORY);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string wrap_checked(std::string_view payload) {
  std::string out(kCheckedPrefix);
  out += sha256_hex(payload);
  out.push_back('\n');
  out += payload;
  return out;
}

std::string unwrap_checked(std::string_view bytes, std::string_view what) {
  const auto nl = bytes.find('\n');
  if (bytes.substr(0, kCheckedPrefix.size()) != kCheckedPrefix || nl == std::string_view::npos) {
    throw IntegrityError(std::string(what) + ": missing checksum header");
  }
  const std::string_view expected = bytes.substr(kCheckedPrefix.size(), nl - kCheckedPrefix.size());
  std::string_view payload = bytes.substr(nl + 1);
  if (sha256_hex(payload) != expected) throw IntegrityError(std::string(what) + ": checksum mismatch");
  return std::string(payload);
}

std::string encode_record_id(std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : id) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '-' || c == '_' || (c == '.' && !out.empty())) {
      out.push_back(c);
    } else {
      out.push_back('%');
      out.push_back(kHex[u >> 4]);
      out.push_back(kHex[u & 0xF]);
    }
  }
  return out;
}

std::string decode_record_id(std::string_view name) {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (name[i] == '%' && i + 2 < name.size()) {
      out.push_back(static_cast<char>(std::stoi(std::string(name.substr(i + 1, 2)), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(name[i]);
    }
  }
  return out;
}

DataStore::DataStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_ / "blobs");
  fs::create_directories(root_ / "records");
  // temp files left behind by a crashed writer were never renamed into place
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().filename().string().find(kTempMarker) != std::string::npos) {
      std::error_code ec;
      fs::remove(entry.path(), ec);
    }
  }
}

fs::path DataStore::blob_path(const std::string& hash) const {
  if (hash.size() != 64 || hash.find_first_not_of("0123456789abcdef") != std::string::npos) {
    throw ValidationError("invalid_hash", "malformed blob address '" + hash + "'");
  }
  return root_ / "blobs" / hash.substr(0, 2) / hash;
}

std::string DataStore::put_blob(std::string_view bytes) {
  std::string hash = sha256_hex(bytes);
  const fs::path p = blob_path(hash);
  if (!fs::exists(p)) write_file_atomic(p, bytes);
  return hash;
}

std::string DataStore::get_blob(const std::string& hash) const {
  const fs::path p = blob_path(hash);
  if (!fs::exists(p)) throw NotFoundError("blob_not_found", "no blob " + hash);
  std::string bytes = read_file(p);
  if (sha256_hex(bytes) != hash) throw IntegrityError("blob " + hash + " is corrupted");
  return bytes;
}

bool DataStore::has_blob(const std::string& hash) const { return fs::exists(blob_path(hash)); }

std::size_t DataStore::blob_count() const {
  std::size_t n = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root_ / "blobs")) {
    if (entry.is_regular_file()) ++n;
  }
  return n;
}

fs::path DataStore::record_path(std::string_view collection, std::string_view id) const {
  return root_ / "records" / encode_record_id(collection) / (encode_record_id(id) + ".json");
}

void DataStore::put_record(std::string_view collection, std::string_view id, const nlohmann::json& value) {
  write_file_atomic(record_path(collection, id), wrap_checked(value.dump()));
}

std::optional<nlohmann::json> DataStore::get_record(std::string_view collection, std::string_view id) const {
  const fs::path p = record_path(collection, id);
  if (!fs::exists(p)) return std::nullopt;
  const std::string payload = unwrap_checked(read_file(p), "record " + std::string(collection) + "/" + std::string(id));
  try {
    return nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception&) {
    throw IntegrityError("record " + std::string(collection) + "/" + std::string(id) + " is not valid JSON");
  }
}

bool DataStore::has_record(std::string_view collection, std::string_view id) const {
  return fs::exists(record_path(collection, id));
}

std::vector<std::string> DataStore::list_records(std::string_view collection) const {
  std::vector<std::string> ids;
  const fs::path dir = root_ / "records" / encode_record_id(collection);
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.size() < 5 || name.substr(name.size() - 5) != ".json") continue;
    ids.push_back(decode_record_id(name.substr(0, name.size() - 5)));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace concernkit
