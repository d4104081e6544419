#include "bss/csv.hpp"

#include <algorithm>
#include <cctype>

#include "bss/error.hpp"

namespace bss::csv {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

void strip_cr(std::string& s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) {
    s.pop_back();
  }
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char const c = line[i];
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

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string{field};
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') {
      out += "\"\"";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

reader::reader(std::istream& in) : in_{in} {
  while (std::getline(in_, buf_)) {
    ++line_no_;
    strip_cr(buf_);
    if (!buf_.empty() && buf_.front() != '#') {
      header_ = split_line(buf_);
      for (auto& h : header_) {
        auto const b = h.find_first_not_of(" \t");
        auto const e = h.find_last_not_of(" \t");
        h = b == std::string::npos ? std::string{} : h.substr(b, e - b + 1);
      }
      break;
    }
  }
}

std::optional<std::size_t> reader::find(std::string_view column) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (iequals(header_[i], column)) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t reader::require(std::string_view column) const {
  if (auto const i = find(column)) {
    return *i;
  }
  throw schema_error{std::string{column}};
}

bool reader::next(std::vector<std::string>& fields) {
  while (std::getline(in_, buf_)) {
    ++line_no_;
    strip_cr(buf_);
    if (buf_.find_first_not_of(" \t") == std::string::npos ||
        buf_.front() == '#') {
      continue;
    }
    fields = split_line(buf_);
    return true;
  }
  return false;
}

}  // namespace bss::csv
