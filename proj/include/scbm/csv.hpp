#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scbm {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kSchemaMarker = "# schema_version=1";

/// One parsed data row with its 1-based physical line number.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Parsed CSV document whose header matched the expected column list.
struct CsvDocument {
  std::string file;
  std::vector<CsvRow> rows;
};

/// Reads `path`, accepting an optional leading schema marker line, and
/// requires the header to equal `columns` exactly. Every data row must have
/// the header's field count. Blank lines are skipped. Throws ParseError.
CsvDocument read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns);

/// Splits one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_line(std::string_view line, bool& ok);

/// Quotes a field when it contains a comma, quote, or leading/trailing space.
std::string csv_escape(std::string_view field);

/// Builds CSV text incrementally; rows are joined with '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header, bool schema_marker = false);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

double parse_real(std::string_view text, const std::string& file, std::size_t line,
                  std::string_view column);
std::optional<double> parse_optional_real(std::string_view text, const std::string& file,
                                          std::size_t line, std::string_view column);

/// Shortest round-trip representation of a double.
std::string format_real(double v);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace scbm
