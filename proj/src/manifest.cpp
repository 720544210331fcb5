// SPDX-License-Identifier: Apache-2.0
#include "egtsyn/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "egtsyn/errors.hpp"

namespace egtsyn {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::string file_digest(const std::filesystem::path& path) { return fnv1a_hex(read_file(path)); }

std::string manifest_to_json(const RunManifest& m) {
  const nlohmann::json doc{{"subcommand", m.subcommand},
                           {"flags", m.flags},
                           {"seed", m.seed},
                           {"input_digests", m.input_digests},
                           {"version", m.version}};
  return doc.dump(1) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    RunManifest m;
    m.subcommand = doc.at("subcommand").get<std::string>();
    m.flags = doc.at("flags").get<std::map<std::string, std::string>>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    m.input_digests = doc.at("input_digests").get<std::map<std::string, std::string>>();
    m.version = doc.at("version").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed run manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
  write_file(path, manifest_to_json(manifest));
}

}  // namespace egtsyn
