// Copyright 2026 The regtrap Authors
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

// Run manifest: input hashes, seeds, and a checksum for every output file.

#include <openssl/evp.h>

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "regtrap/error.hpp"
#include "regtrap/scenario.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kManifestName = "manifest.json";

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

struct ManifestFile {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uint64_t bytes = 0;

  friend bool operator==(const ManifestFile&, const ManifestFile&) = default;
};

struct RunManifest {
  int schema_version = kSchemaVersion;
  std::string tool_version{kToolVersion};
  std::string config_hash;
  std::string scenario_hash;
  std::string curriculum_hash;
  std::string archetypes_hash;
  std::vector<std::uint64_t> seeds;
  int n_agents = 0;
  int horizon = 0;
  std::vector<std::string> archetype_ids;
  bool event_logs = false;
  std::string created_utc;  // informational; never compared
  std::vector<ManifestFile> files;
};

/// Hash over every input that can change a result.
inline std::string config_hash(std::string_view scenario_text, std::string_view curriculum_text,
                               std::string_view archetypes_text,
                               const std::vector<std::uint64_t>& seeds) {
  std::string all;
  for (auto part : {scenario_text, curriculum_text, archetypes_text}) {
    all += sha256_hex(part);
    all += '\n';
  }
  for (auto s : seeds) all += std::to_string(s) + ",";
  return sha256_hex(all);
}

inline std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ManifestFile describe_file(const std::filesystem::path& dir, const std::string& rel) {
  const std::string data = table::read_file((dir / rel).string());
  return {rel, sha256_hex(data), data.size()};
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["schema_version"] = m.schema_version;
  j["tool_version"] = m.tool_version;
  j["config_hash"] = m.config_hash;
  j["scenario_hash"] = m.scenario_hash;
  j["curriculum_hash"] = m.curriculum_hash;
  j["archetypes_hash"] = m.archetypes_hash;
  j["seeds"] = m.seeds;
  j["n_agents"] = m.n_agents;
  j["horizon"] = m.horizon;
  j["archetype_ids"] = m.archetype_ids;
  j["event_logs"] = m.event_logs;
  j["created_utc"] = m.created_utc;
  auto files = nlohmann::ordered_json::array();
  for (const auto& f : m.files)
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j, std::string_view source) {
  RunManifest m;
  try {
    m.schema_version = j.at("schema_version").get<int>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.scenario_hash = j.at("scenario_hash").get<std::string>();
    m.curriculum_hash = j.at("curriculum_hash").get<std::string>();
    m.archetypes_hash = j.at("archetypes_hash").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.n_agents = j.at("n_agents").get<int>();
    m.horizon = j.at("horizon").get<int>();
    m.archetype_ids = j.at("archetype_ids").get<std::vector<std::string>>();
    m.event_logs = j.at("event_logs").get<bool>();
    m.created_utc = j.at("created_utc").get<std::string>();
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uint64_t>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ManifestMismatch, std::string(source) + ": " + e.what());
  }
  if (m.schema_version != kSchemaVersion)
    throw Error(ErrorKind::ManifestMismatch,
                std::string(source) + ": schema_version " + std::to_string(m.schema_version) +
                    " is not supported");
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& dir) {
  const std::string path = (dir / kManifestName).string();
  std::string text;
  try {
    text = table::read_file(path);
  } catch (const Error&) {
    throw Error(ErrorKind::ManifestMismatch, "missing manifest '" + path + "'");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ManifestMismatch, path + ": " + e.what());
  }
  return manifest_from_json(j, path);
}

/// Recomputes every listed checksum. Throws ManifestMismatch on the first
/// missing or altered file.
inline void verify(const RunManifest& m, const std::filesystem::path& dir) {
  for (const auto& f : m.files) {
    if (!std::filesystem::is_regular_file(dir / f.path))
      throw Error(ErrorKind::ManifestMismatch, "listed file missing: " + (dir / f.path).string());
    if (describe_file(dir, f.path) != f)
      throw Error(ErrorKind::ManifestMismatch, "checksum mismatch: " + (dir / f.path).string());
  }
}

}  // namespace regtrap
