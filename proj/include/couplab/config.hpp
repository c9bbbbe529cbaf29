#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace couplab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Minimal TOML reader: [section] headers, key = value with strings, numbers,
// booleans and flat arrays, # comments. Keys are exposed as "section.key".
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_string(const std::string& text,
                                const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer_or(const std::string& key, long fallback) const;
  bool flag_or(const std::string& key, bool fallback) const;
  std::string text_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> number_list_or(const std::string& key,
                                     std::vector<double> fallback = {}) const;

  std::vector<std::string> keys() const;

 private:
  struct Value {
    enum Kind { Number, Text, Flag, NumberList } kind = Number;
    double num = 0;
    std::string text;
    bool flag = false;
    std::vector<double> list;
  };
  std::map<std::string, Value> values_;
  std::string origin_;

  const Value& get(const std::string& key, Value::Kind kind) const;
};

}  // namespace couplab
