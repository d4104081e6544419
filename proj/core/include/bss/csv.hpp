#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bss::csv {

/// Splits one line into fields. Double-quoted fields may contain commas and
/// doubled quotes.
std::vector<std::string> split_line(std::string_view line);

/// Quotes a field only when it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Header-aware line reader. Column lookup is case-insensitive; lines
/// starting with '#' are skipped.
class reader {
public:
  explicit reader(std::istream& in);

  std::vector<std::string> const& header() const { return header_; }

  std::optional<std::size_t> find(std::string_view column) const;
  /// Throws schema_error naming the column when absent.
  std::size_t require(std::string_view column) const;

  /// Next non-blank, non-comment data line; false at end of input.
  bool next(std::vector<std::string>& fields);

  /// 1-based line number of the last line returned by next().
  std::size_t line_number() const { return line_no_; }

private:
  std::istream& in_;
  std::vector<std::string> header_;
  std::size_t line_no_{0};
  std::string buf_;
};

}  // namespace bss::csv
