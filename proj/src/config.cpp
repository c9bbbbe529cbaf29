#include "couplab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace couplab {

namespace {

std::string strip(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// Drop an unquoted trailing comment.
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  std::ostringstream os;
  os << origin << ":" << line << ": " << msg;
  throw ConfigError(os.str());
}

bool parse_number(const std::string& tok, double* out) {
  if (tok.empty()) return false;
  const char* begin = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + tok.size()) return false;
  *out = v;
  return true;
}

std::string parse_quoted(const std::string& tok, const std::string& origin, int line) {
  if (tok.size() < 2 || tok.back() != '"')
    fail(origin, line, "unterminated string: " + tok);
  std::string out;
  for (size_t i = 1; i + 1 < tok.size(); ++i) {
    char c = tok[i];
    if (c == '\\' && i + 2 < tok.size()) {
      char n = tok[i + 1];
      if (n == '"' || n == '\\') {
        out.push_back(n);
        ++i;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(origin, lineno, "malformed section header: " + line);
      section = strip(line.substr(1, line.size() - 2));
      if (section.empty()) fail(origin, lineno, "empty section name");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineno, "expected key = value: " + line);
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (key.empty()) fail(origin, lineno, "empty key");
    if (val.empty()) fail(origin, lineno, "missing value for key: " + key);
    std::string full = section.empty() ? key : section + "." + key;
    if (cfg.values_.count(full)) fail(origin, lineno, "duplicate key: " + full);

    Value v;
    if (val.front() == '"') {
      v.kind = Value::Text;
      v.text = parse_quoted(val, origin, lineno);
    } else if (val == "true" || val == "false") {
      v.kind = Value::Flag;
      v.flag = (val == "true");
    } else if (val.front() == '[') {
      if (val.back() != ']') fail(origin, lineno, "unterminated array: " + val);
      v.kind = Value::NumberList;
      std::string body = val.substr(1, val.size() - 2);
      std::string tok;
      std::istringstream items(body);
      while (std::getline(items, tok, ',')) {
        tok = strip(tok);
        if (tok.empty()) continue;
        double x = 0;
        if (!parse_number(tok, &x))
          fail(origin, lineno, "array element is not a number: " + tok);
        v.list.push_back(x);
      }
    } else {
      if (!parse_number(val, &v.num))
        fail(origin, lineno, "cannot parse value: " + val);
    }
    cfg.values_.emplace(std::move(full), std::move(v));
  }
  return cfg;
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) > 0; }

const ConfigMap::Value& ConfigMap::get(const std::string& key, Value::Kind kind) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(origin_ + ": missing key: " + key);
  if (it->second.kind != kind) {
    static const char* names[] = {"number", "string", "boolean", "array"};
    throw ConfigError(origin_ + ": key " + key + " is not a " + names[kind]);
  }
  return it->second;
}

double ConfigMap::number(const std::string& key) const {
  return get(key, Value::Number).num;
}

double ConfigMap::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long ConfigMap::integer_or(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  double v = number(key);
  long n = static_cast<long>(v);
  if (static_cast<double>(n) != v)
    throw ConfigError(origin_ + ": key " + key + " must be an integer");
  return n;
}

bool ConfigMap::flag_or(const std::string& key, bool fallback) const {
  return has(key) ? get(key, Value::Flag).flag : fallback;
}

std::string ConfigMap::text_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key, Value::Text).text : fallback;
}

std::vector<double> ConfigMap::number_list_or(const std::string& key,
                                              std::vector<double> fallback) const {
  return has(key) ? get(key, Value::NumberList).list : std::move(fallback);
}

std::vector<std::string> ConfigMap::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& kv : values_) out.push_back(kv.first);
  return out;
}

}  // namespace couplab
