#include "ltvnet/harness/manifest.hpp"

#include "ltvnet/common.hpp"
#include "ltvnet/common/csv.hpp"

namespace ltvnet::harness {

namespace fs = std::filesystem;

const std::string* RunManifest::get(std::string_view key) const {
    const auto it = entries.find(std::string(key));
    return it == entries.end() ? nullptr : &it->second;
}

fs::path manifest_path(const fs::path& out_dir) { return out_dir / "manifest.txt"; }

RunManifest load_manifest(const fs::path& out_dir) {
    RunManifest m;
    const fs::path path = manifest_path(out_dir);
    if (!fs::exists(path)) return m;
    const std::string text = read_file(path);
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || eq == 0) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed manifest line");
        }
        m.set(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    return m;
}

std::string format_manifest(const RunManifest& manifest) {
    std::string out;
    for (const auto& [key, value] : manifest.entries) {
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    return out;
}

void save_manifest(const fs::path& out_dir, RunManifest manifest) {
    manifest.set("tool_version", std::string(kToolVersion));
    for (const auto& [key, value] : manifest.entries) {
        if (key.ends_with(".path") && !fs::exists(value)) {
            throw DataError("manifest entry " + key + " names a missing file: " + value);
        }
    }
    write_file_atomic(manifest_path(out_dir), format_manifest(manifest));
}

}  // namespace ltvnet::harness
