#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tailcp/series.hpp"

namespace tailcp {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

struct ReadOptions {
  /// Column name (header) or 1-based index; empty picks the first numeric
  /// column after an optional leading date column.
  std::string column;
};

/// Reads single-column numbers or delimited rows with an optional ISO date
/// in the first field. A first line whose value field is not numeric is
/// treated as a header. Lines starting with '#' and blank lines are skipped.
TimeSeries parse_series(std::string_view text, const ReadOptions& options = {});
TimeSeries read_series(const std::filesystem::path& path, const ReadOptions& options = {});

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);
void append_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace tailcp
