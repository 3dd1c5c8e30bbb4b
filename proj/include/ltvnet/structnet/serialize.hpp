#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ltvnet/structnet/model.hpp"

namespace ltvnet::structnet {

// Plain-text model format, version 1:
//
//   ltvnet-structnet v1 N=<n> M=<m> A=<sizes>:<act> B=<sizes>:<act>
//   A.W0 <row-major values>
//   A.b0 <values>
//   ...
//   B.W0 ...
//
// <sizes> is a comma-separated layer list. Floats are written in shortest
// round-trip form, so save/load is value-exact.
inline constexpr std::string_view kModelFormatTag = "ltvnet-structnet";
inline constexpr int kModelFormatVersion = 1;

std::string serialize_model(const StructuredModel& model);
StructuredModel parse_model(std::string_view text);

void save_model(const StructuredModel& model, const std::filesystem::path& path);
StructuredModel load_model(const std::filesystem::path& path);

}  // namespace ltvnet::structnet
