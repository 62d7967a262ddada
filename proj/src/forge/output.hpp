#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cocycle::forge {

using OrderedJson = nlohmann::ordered_json;

/// One CSV table: header row plus numeric rows, written with 17 significant
/// digits, LF line endings, UTF-8. Byte-stable for identical inputs.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);

void write_json(const std::filesystem::path& path, const OrderedJson& value);

/// FNV-1a 64-bit checksum of a file's bytes, as a fixed-width hex string.
std::string file_checksum(const std::filesystem::path& path);

/// Manifest of emitted files: name, size, checksum.
OrderedJson build_manifest(const std::filesystem::path& dir,
                           const std::vector<std::string>& names);

// =============================================================================
// Minimal static SVG emission (no external plotting dependency)
// =============================================================================

void write_svg_line_chart(const std::filesystem::path& path, const std::string& title,
                          const std::vector<double>& xs, const std::vector<double>& ys);

void write_svg_heatmap(const std::filesystem::path& path, const std::string& title,
                       const std::vector<long long>& counts, int bins);

}  // namespace cocycle::forge
