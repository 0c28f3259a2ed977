#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value configuration with '#' comments; nested structure via
/// dotted keys. Keys are kept sorted so emit() is canonical and
/// parse(emit(c)) == c.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);
  /// Applies a "key=value" command-line override.
  void apply_override(const std::string& kv);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of doubles (single values give one element).
  std::vector<double> get_list(const std::string& key) const;
  std::vector<std::string> get_str_list(const std::string& key) const;

  /// Throws ConfigError naming the first unknown key.
  void require_known(const std::set<std::string>& allowed) const;

  std::string emit() const;
  bool operator==(const Config& other) const { return values_ == other.values_; }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace aniso
