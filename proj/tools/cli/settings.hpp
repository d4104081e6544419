#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bss::cli {

/// Resolved key=value settings: built-in defaults, then the config file,
/// then command-line values.
class settings {
public:
  settings();

  /// key = value lines; '#' starts a comment; '-' in keys reads as '_'.
  /// Throws validation_error on unknown keys or malformed lines.
  void load_file(std::filesystem::path const& path);
  void set(std::string key, std::string value);

  bool explicitly_set(std::string const& key) const;
  std::string const& text(std::string const& key) const;
  long long integer(std::string const& key) const;
  double real(std::string const& key) const;
  bool flag(std::string const& key) const;
  std::vector<int> int_list(std::string const& key) const;
  std::vector<std::string> word_list(std::string const& key) const;

  /// Sorted key=value lines, leaving out paths and the worker count so the
  /// text, and its hash, only reflect what changes numbers.
  std::string effective() const;

  static std::vector<std::string> const& keys();

private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

}  // namespace bss::cli
