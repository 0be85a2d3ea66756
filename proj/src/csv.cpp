#include "scbm/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scbm/error.hpp"

namespace scbm {

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out.push_back(',');
    out += v[i];
  }
  return out;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line, bool& ok) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  ok = true;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      if (!cur.empty() || was_quoted) {
        ok = false;
        return fields;
      }
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted) {
        ok = false;
        return fields;
      }
      cur.push_back(c);
    }
  }
  if (quoted) ok = false;
  fields.push_back(std::move(cur));
  return fields;
}

CsvDocument read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());

  CsvDocument doc;
  doc.file = path.filename().string();
  std::string raw;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim_cr(raw);
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
      line.remove_prefix(3);
    }
    if (!have_header) {
      if (!line.empty() && line.front() == '#') {
        if (line != kSchemaMarker) {
          throw ParseError(doc.file, line_no, "unsupported schema marker '" + std::string(line) + "'");
        }
        continue;
      }
      bool ok = false;
      auto header = split_csv_line(line, ok);
      if (!ok || header != columns) {
        throw ParseError(doc.file, line_no, "expected header '" + join(columns) + "'");
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    bool ok = false;
    auto fields = split_csv_line(line, ok);
    if (!ok) throw ParseError(doc.file, line_no, "malformed quoting");
    if (fields.size() != columns.size()) {
      throw ParseError(doc.file, line_no,
                       fmt::format("expected {} fields, found {}", columns.size(), fields.size()));
    }
    doc.rows.push_back({line_no, std::move(fields)});
  }
  if (!have_header) throw ParseError(doc.file, line_no + 1, "missing header row");
  return doc;
}

std::string csv_escape(std::string_view field) {
  const bool needs = field.find_first_of(",\"\n\r") != std::string_view::npos ||
                     (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header, bool schema_marker)
    : width_(header.size()) {
  if (schema_marker) {
    text_ += kSchemaMarker;
    text_.push_back('\n');
  }
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) {
    throw Error(ErrorKind::InvalidArgument, "CSV row width does not match header");
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_.push_back(',');
    text_ += csv_escape(fields[i]);
  }
  text_.push_back('\n');
}

double parse_real(std::string_view text, const std::string& file, std::size_t line,
                  std::string_view column) {
  double v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(file, line, fmt::format("column {}: '{}' is not a finite number", column, text));
  }
  return v;
}

std::optional<double> parse_optional_real(std::string_view text, const std::string& file,
                                          std::size_t line, std::string_view column) {
  if (text.empty()) return std::nullopt;
  return parse_real(text, file, line, column);
}

std::string format_real(double v) { return fmt::format("{}", v); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorKind::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace scbm
