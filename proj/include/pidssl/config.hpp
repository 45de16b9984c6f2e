#ifndef PIDSSL_CONFIG_HPP
#define PIDSSL_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pidssl {

// Flat `key = value` configuration with dotted keys. Lines starting with '#'
// are comments. Overrides are "key=value" strings applied on top of the file.
class Config {
 public:
  Config() = default;

  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  void apply_override(const std::string& key_equals_value);

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;

  // Comma-separated unsigned integers, e.g. "256,32,64,16".
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }

  // Unknown keys are configuration mistakes; callers pass the set they accept.
  void require_known_keys(const std::vector<std::string>& known_prefixes) const;

  // Deterministic, sorted echo of every resolved key.
  std::string render() const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

}  // namespace pidssl

#endif
