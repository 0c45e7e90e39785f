#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace svbench::io {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place, so a failed
/// write never leaves a truncated output behind.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Parses a JSON Lines file. Blank lines are skipped; a final line without a
/// trailing newline that fails to parse is treated as a torn write and ignored.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& rows);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string_view s);

}  // namespace svbench::io
