#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ltvnet {

// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

// Strict parse of a whole field; throws DataError on trailing garbage.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row

    // Index of a header column; throws DataError if absent.
    std::size_t column(std::string_view name) const;
};

// Reads a header-first CSV. Every row must have as many fields as the
// header; violations throw DataError naming the file and line.
CsvTable read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace ltvnet
