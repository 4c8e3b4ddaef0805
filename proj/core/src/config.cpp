#include "hyperfit/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace hyperfit::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Config Config::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

Config Config::parse_string(std::string_view text, std::string_view origin) {
  Config cfg;
  cfg.origin_ = std::string(origin);
  std::string section;
  long line_no = 0;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError(cfg.origin_ + ": unterminated section at line " + std::to_string(line_no));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError(cfg.origin_ + ": empty section name at line " + std::to_string(line_no));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(cfg.origin_ + ": expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError(cfg.origin_ + ": empty key at line " + std::to_string(line_no));
    if (!cfg.entries_.emplace(std::make_pair(section, key), Entry{value, false, line_no}).second)
      throw ConfigError(cfg.origin_ + ": duplicate key `" + section + "." + key + "` at line " +
                        std::to_string(line_no));
  }
  return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
  return entries_.count({section, key}) > 0;
}

std::string Config::get_string(const std::string& section, const std::string& key, std::string fallback) {
  const auto it = entries_.find({section, key});
  if (it == entries_.end()) return fallback;
  it->second.consumed = true;
  return it->second.value;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) {
  const auto it = entries_.find({section, key});
  if (it == entries_.end()) return fallback;
  it->second.consumed = true;
  double v = 0.0;
  const std::string& s = it->second.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(origin_ + ": `" + section + "." + key + "` is not a number: " + s);
  return v;
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) {
  const auto it = entries_.find({section, key});
  if (it == entries_.end()) return fallback;
  it->second.consumed = true;
  long v = 0;
  const std::string& s = it->second.value;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ConfigError(origin_ + ": `" + section + "." + key + "` is not an integer: " + s);
  return v;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) {
  const auto it = entries_.find({section, key});
  if (it == entries_.end()) return fallback;
  it->second.consumed = true;
  std::string s = it->second.value;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(origin_ + ": `" + section + "." + key + "` is not a boolean: " + it->second.value);
}

void Config::ensure_fully_consumed() const {
  for (const auto& [sk, entry] : entries_) {
    if (!entry.consumed)
      throw ConfigError(origin_ + ": unknown key `" + sk.first + "." + sk.second + "` at line " +
                        std::to_string(entry.line));
  }
}

}  // namespace hyperfit::io
