#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace ltvnet::harness {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Run record kept as manifest.txt in the output directory: flat key=value
// lines, sorted by key. Each subcommand loads it, adds its own entries and
// writes it back atomically.
struct RunManifest {
    std::map<std::string, std::string> entries;

    void set(const std::string& key, std::string value) { entries[key] = std::move(value); }
    const std::string* get(std::string_view key) const;
};

std::filesystem::path manifest_path(const std::filesystem::path& out_dir);

// Missing file gives an empty manifest; malformed lines throw DataError.
RunManifest load_manifest(const std::filesystem::path& out_dir);

std::string format_manifest(const RunManifest& manifest);

// Refuses (DataError) to record a key ending in ".path" whose file does not
// exist, so the manifest never points at nothing.
void save_manifest(const std::filesystem::path& out_dir, RunManifest manifest);

}  // namespace ltvnet::harness
