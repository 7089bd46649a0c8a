#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skg {

inline constexpr const char* kManifestSchema = "skg-manifest/1";
inline constexpr const char* kManifestName = "manifest.json";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Write to a sibling temporary file and rename it over path. Creates parent directories.
void write_atomic(const std::filesystem::path& path, std::string_view content);

struct FileRecord {
  std::string path;  // relative to the run directory, '/' separated
  std::string sha256;
  std::uintmax_t bytes = 0;
  bool operator==(const FileRecord&) const = default;
};

/// Every regular file under dir except the manifest, sorted by path.
std::vector<FileRecord> inventory(const std::filesystem::path& dir);

struct RunManifest {
  std::string schema = kManifestSchema;
  std::string version;
  std::string config_json = "{}";   // fully resolved configuration
  std::string summary_json = "{}";  // kind-specific headline numbers
  std::vector<std::pair<std::string, double>> timings;  // phase, seconds
  std::vector<std::string> warnings;
  std::optional<std::string> failure;
  int exit_code = 0;
  std::vector<FileRecord> files;
};

std::string manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);
RunManifest read_manifest(const std::filesystem::path& dir);
void write_manifest(const std::filesystem::path& dir, const RunManifest& m);

struct ManifestCheck {
  std::vector<std::string> missing;   // listed, not on disk
  std::vector<std::string> changed;   // hash or size differ
  std::vector<std::string> unlisted;  // on disk, not listed
  bool intact() const { return missing.empty() && changed.empty() && unlisted.empty(); }
};

ManifestCheck verify_manifest(const std::filesystem::path& dir, const RunManifest& m);

}  // namespace skg
