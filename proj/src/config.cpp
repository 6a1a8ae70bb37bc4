#include "teleamp/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "teleamp/errors.hpp"

namespace teleamp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

constexpr std::string_view kSeriesPrefix = "series.";

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  const std::string_view t = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      throw ConfigError(fmt::format("{}:{}: empty key or value", origin, line_no));
    }
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError(fmt::format("{}:{}: duplicate key '{}'", origin, line_no, key));
    }
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

double Config::number_or(const std::string& key, double fallback) const {
  const auto v = get(key);
  return v ? parse_double(*v, fmt::format("{} ({})", key, origin_)) : fallback;
}

int Config::integer_or(const std::string& key, int fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  int value = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), value);
  if (ec != std::errc() || ptr != v->data() + v->size()) {
    throw ConfigError(fmt::format("{} ({}): '{}' is not an integer", key, origin_, *v));
  }
  return value;
}

std::vector<std::string> Config::series_names() const {
  std::set<std::string> names;
  for (const auto& [key, value] : values_) {
    if (!key.starts_with(kSeriesPrefix)) continue;
    const auto rest = std::string_view(key).substr(kSeriesPrefix.size());
    const auto dot = rest.find('.');
    if (dot == std::string_view::npos || dot == 0) {
      throw ConfigError(fmt::format("{}: malformed series key '{}'", origin_, key));
    }
    names.emplace(rest.substr(0, dot));
  }
  return {names.begin(), names.end()};
}

Config Config::with_series(const std::string& name) const {
  Config out;
  out.origin_ = fmt::format("{} [series {}]", origin_, name);
  const std::string prefix = fmt::format("{}{}.", kSeriesPrefix, name);
  bool found = false;
  for (const auto& [key, value] : values_) {
    if (!key.starts_with(kSeriesPrefix)) out.values_[key] = value;
  }
  for (const auto& [key, value] : values_) {
    if (key.starts_with(prefix)) {
      out.values_[key.substr(prefix.size())] = value;
      found = true;
    }
  }
  if (!found) throw ConfigError(fmt::format("{}: no series named '{}'", origin_, name));
  return out;
}

}  // namespace teleamp
