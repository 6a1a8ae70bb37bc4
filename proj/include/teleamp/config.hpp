#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teleamp {

/// Flat `dotted.key = value` configuration. Lines starting with '#' and blank
/// lines are ignored; a trailing "# ..." after a value is a comment.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double number_or(const std::string& key, double fallback) const;
  int integer_or(const std::string& key, int fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  /// Names <n> that appear as `series.<n>.*`, sorted.
  std::vector<std::string> series_names() const;

  /// Base keys (everything outside `series.`) overlaid with `series.<name>.*`.
  Config with_series(const std::string& name) const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Parses a full-string double; throws ConfigError naming `what` otherwise.
double parse_double(std::string_view text, std::string_view what);

}  // namespace teleamp
