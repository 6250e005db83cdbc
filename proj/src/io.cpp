#include "tailcp/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "tailcp/error.hpp"

namespace tailcp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

struct Line {
  std::size_t number;
  std::string_view text;
};

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

TimeSeries parse_series(std::string_view text, const ReadOptions& options) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view t = trim(raw);
    if (!t.empty() && t.front() != '#') lines.push_back({number, t});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (lines.empty()) fail(ErrorCode::TooShort, "input contains no observations");

  std::vector<std::string_view> header;
  std::size_t first_data = 0;
  {
    const auto fields = split_fields(lines.front().text);
    const bool any_datum = std::any_of(fields.begin(), fields.end(), [](std::string_view f) {
      double d;
      return parse_number(f, d) || Date::parse_iso(f).has_value();
    });
    if (!any_datum) {
      header = fields;
      first_data = 1;
    }
  }
  if (first_data >= lines.size()) fail(ErrorCode::TooShort, "input contains a header but no observations");

  const auto first_fields = split_fields(lines[first_data].text);
  const bool dated = Date::parse_iso(first_fields.front()).has_value();

  std::size_t column = dated ? 1 : 0;
  if (!options.column.empty()) {
    double idx;
    if (parse_number(options.column, idx)) {
      if (idx < 1 || idx != std::floor(idx))
        fail(ErrorCode::InvalidArgument, "column index must be a positive integer");
      column = static_cast<std::size_t>(idx) - 1;
    } else {
      auto it = std::find_if(header.begin(), header.end(),
                             [&](std::string_view h) { return iequals(h, options.column); });
      if (it == header.end())
        fail(ErrorCode::InvalidArgument, "no column named '" + options.column + "' in the header");
      column = static_cast<std::size_t>(it - header.begin());
    }
  }
  if (dated && column == 0) fail(ErrorCode::InvalidArgument, "the selected column holds dates, not values");

  std::vector<double> values;
  std::vector<Date> dates;
  values.reserve(lines.size());
  for (std::size_t i = first_data; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i].text);
    if (column >= fields.size())
      parse_fail(lines[i].number, "expected at least " + std::to_string(column + 1) + " fields");
    if (dated) {
      const auto d = Date::parse_iso(fields.front());
      if (!d) parse_fail(lines[i].number, "cannot parse '" + std::string(fields.front()) + "' as a YYYY-MM-DD date");
      if (!dates.empty() && !(dates.back() < *d))
        parse_fail(lines[i].number, "dates must be strictly increasing");
      dates.push_back(*d);
    }
    double v;
    if (!parse_number(fields[column], v))
      parse_fail(lines[i].number, "cannot parse '" + std::string(fields[column]) + "' as a number");
    if (!std::isfinite(v)) parse_fail(lines[i].number, "value is not finite");
    values.push_back(v);
  }
  if (dated) return TimeSeries(std::move(values), std::move(dates));
  return TimeSeries(std::move(values));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    fail(ErrorCode::NotFound, "file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "error reading " + path.string());
  return os.str();
}

TimeSeries read_series(const std::filesystem::path& path, const ReadOptions& options) {
  return parse_series(read_text_file(path), options);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::IoError, "error writing " + path.string());
}

void append_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path.string() + " for appending");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(ErrorCode::IoError, "error writing " + path.string());
}

}  // namespace tailcp
