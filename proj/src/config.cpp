#include "aniso/config.hpp"

#include <fstream>
#include <sstream>

namespace aniso {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    }
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void Config::apply_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override must be key=value: '" + kv + "'");
  }
  values_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key: " + key);
  return it->second;
}

std::string Config::get_str(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  try {
    return std::stod(get_str(key));
  } catch (const std::invalid_argument&) {
    throw ConfigError("config key " + key + " is not a number");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  try {
    return std::stoi(get_str(key));
  } catch (const std::invalid_argument&) {
    throw ConfigError("config key " + key + " is not an integer");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config key " + key + " is not a boolean");
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& tok : get_str_list(key)) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::invalid_argument&) {
      throw ConfigError("config key " + key + ": '" + tok + "' is not a number");
    }
  }
  return out;
}

std::vector<std::string> Config::get_str_list(const std::string& key) const {
  std::stringstream ss(get_str(key));
  std::string tok;
  std::vector<std::string> out;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  if (out.empty()) throw ConfigError("config key " + key + " has an empty list");
  return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key: " + key);
    }
  }
}

std::string Config::emit() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) {
    out << key << "=" << value << "\n";
  }
  return out.str();
}

}  // namespace aniso
