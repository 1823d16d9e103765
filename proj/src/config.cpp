#include "promptqa/config.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace promptqa {

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    std::size_t eq = line.find('=', start);
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key = value");
    auto trim = [](std::string s) {
      std::size_t a = s.find_first_not_of(" \t");
      std::size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    cfg.values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  values[key] = value;
}

std::string RunConfig::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

std::string RunConfig::meta_json() const {
  nlohmann::json cfg = nlohmann::json::object();
  for (const auto& [k, v] : values) cfg[k] = v;
  return nlohmann::json{{"config", cfg}, {"version", kToolVersion}}.dump();
}

}  // namespace promptqa
