#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rideprobe {

/// RFC 4180-style comma-separated reader over an in-memory buffer.
/// Handles quoted fields, doubled quotes and CRLF line endings.
class CsvReader {
 public:
  explicit CsvReader(std::string text);
  static CsvReader from_file(const std::filesystem::path& path);

  /// Header row; empty when the input is empty.
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::optional<std::size_t> column_index(std::string_view name) const;

  /// Reads the next record into `fields`. Returns false at end of input.
  /// Blank lines are skipped.
  bool next(std::vector<std::string>& fields);

  /// 1-based line number of the last record returned.
  std::size_t line() const noexcept { return record_line_; }

 private:
  bool read_record(std::vector<std::string>& fields);

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
  std::vector<std::string> header_;
};

std::optional<double> parse_double(std::string_view text) noexcept;
std::string_view trim(std::string_view text) noexcept;

}  // namespace rideprobe
