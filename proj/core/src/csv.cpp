#include "triadkit/csv.hpp"

#include <charconv>
#include <cmath>

#include "triadkit/types.hpp"

namespace triadkit::csv {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(std::move(field));
  return out;
}

Reader::Reader(const std::filesystem::path& path, const std::vector<std::string>& expected)
    : in_(path) {
  if (!in_) throw ValidationError("cannot open " + path.string());
  std::vector<std::string> fields;
  if (!next(fields)) {
    header_ = expected;  // zero-byte file: no rows
    return;
  }
  header_ = fields;
  if (!header_.empty() && header_[0].rfind("\xEF\xBB\xBF", 0) == 0) header_[0].erase(0, 3);
  if (header_.size() < expected.size())
    throw ValidationError("header of " + path.string() + " has too few columns", line_);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (header_[i] != expected[i])
      throw ValidationError("unexpected header column '" + header_[i] + "' in " +
                                path.string() + ", expected '" + expected[i] + "'",
                            line_);
  }
}

bool Reader::next(std::vector<std::string>& fields) {
  while (std::getline(in_, buf_)) {
    ++line_;
    if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
    if (buf_.empty()) continue;
    fields = split(buf_);
    return true;
  }
  return false;
}

std::int64_t parse_int(std::string_view s, std::size_t line, std::string_view what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty())
    throw ValidationError("malformed " + std::string(what) + " '" + std::string(s) + "'", line);
  return v;
}

double parse_double(std::string_view s, std::size_t line, std::string_view what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty() || !std::isfinite(v))
    throw ValidationError("malformed " + std::string(what) + " '" + std::string(s) + "'", line);
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace triadkit::csv
