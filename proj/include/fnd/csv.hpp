#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fnd/common.hpp"

namespace fnd::csv {

/// Line-oriented reader for the corpus files: header row, comma separator,
/// optional double-quoted fields. Blank lines are skipped.
class Reader {
 public:
  Reader(const std::string& path, std::vector<std::string_view> expected_header) : path_(path) {
    in_.open(path);
    if (!in_) throw InputError("cannot open file", path_);
    std::vector<std::string> header;
    if (!next(header)) throw InputError("missing header row", path_, 1);
    if (header.size() != expected_header.size()) {
      throw InputError("unexpected header, want " + join(expected_header), path_, line_);
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] != expected_header[i]) {
        throw InputError("unexpected header, want " + join(expected_header), path_, line_);
      }
    }
    width_ = header.size();
  }

  /// Reads the next data row into `fields`; false at end of file.
  bool next(std::vector<std::string>& fields) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_;
      if (line_ == 1 && raw.starts_with("\xEF\xBB\xBF")) raw.erase(0, 3);
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      if (raw.find_first_not_of(" \t") == std::string::npos) continue;
      split(raw, fields);
      if (width_ != 0 && fields.size() != width_) {
        throw InputError("expected " + std::to_string(width_) + " fields, got " +
                             std::to_string(fields.size()),
                         path_, line_);
      }
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }
  const std::string& path() const noexcept { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw InputError(what, path_, line_); }

 private:
  void split(const std::string& raw, std::vector<std::string>& fields) const {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const char c = raw[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < raw.size() && raw[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(trim(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (quoted) throw InputError("unterminated quoted field", path_, line_);
    fields.push_back(trim(cur));
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  static std::string join(const std::vector<std::string_view>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (i) out += ',';
      out += parts[i];
    }
    return out;
  }

  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
  std::size_t width_ = 0;
};

/// Quotes a field only when it needs it.
inline std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

/// Shortest round-trippable decimal form of a double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace fnd::csv
