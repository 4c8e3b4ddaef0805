#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperfit::io {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sectioned key=value configuration text:
///
///   # comment
///   [train]
///   epochs = 20000
///
/// Typed getters consume keys; ensure_fully_consumed() rejects typos by
/// flagging any key nobody asked for.
class Config {
 public:
  static Config parse_file(const std::filesystem::path& path);
  static Config parse_string(std::string_view text, std::string_view origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, std::string fallback);
  double get_double(const std::string& section, const std::string& key, double fallback);
  long get_int(const std::string& section, const std::string& key, long fallback);
  bool get_bool(const std::string& section, const std::string& key, bool fallback);

  void ensure_fully_consumed() const;

 private:
  struct Entry {
    std::string value;
    mutable bool consumed = false;
    long line = 0;
  };
  std::map<std::pair<std::string, std::string>, Entry> entries_;
  std::string origin_;
};

}  // namespace hyperfit::io
