#pragma once

#include <map>
#include <string>

namespace promptqa {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat key-value run configuration. File values are loaded first and flag
// overrides applied on top; the effective map is echoed into every output
// artifact for provenance.
struct RunConfig {
  std::map<std::string, std::string> values;

  // Lines of "key = value"; '#' comments and blank lines ignored.
  static RunConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key, const std::string& fallback = "") const;
  bool has(const std::string& key) const { return values.count(key) != 0; }

  // {"config": {...}, "version": "..."} for embedding in artifacts.
  std::string meta_json() const;
};

}  // namespace promptqa
