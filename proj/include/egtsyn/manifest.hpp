// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace egtsyn {

/// Everything needed to repeat a CLI run: the subcommand, every resolved
/// flag value, the seed, and digests of every input file.
struct RunManifest {
  std::string subcommand;
  std::map<std::string, std::string> flags;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path -> fnv1a64 hex
  std::string version;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Digest of a file's bytes. Throws Error when it cannot be read.
std::string file_digest(const std::filesystem::path& path);

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Reads a whole file. Throws Error naming the path on failure.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace egtsyn
