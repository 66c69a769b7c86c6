#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pptgnn {

/// Flat "key = value" text with dotted section prefixes (graph.window_size,
/// model.hidden_size, ...). Keys are kept sorted so the serialized form is
/// canonical: two equal maps always produce the same bytes.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string& path);

  std::string serialize() const;
  void save(const std::string& path) const;

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string require(const std::string& key) const;

  double get_double(const std::string& key) const;
  int64_t get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void set(const std::string& key, const char* value) { values_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, int64_t value);
  void set(const std::string& key, uint64_t value) { set(key, static_cast<int64_t>(value)); }
  void set(const std::string& key, int value) { set(key, static_cast<int64_t>(value)); }
  void set(const std::string& key, bool value) { values_[key] = value ? "true" : "false"; }

  // All entries whose key starts with `prefix`, with the prefix removed.
  KeyValueConfig section(const std::string& prefix) const;
  void merge(const KeyValueConfig& other, const std::string& prefix = "");

  const std::map<std::string, std::string>& entries() const { return values_; }
  bool operator==(const KeyValueConfig&) const = default;

 private:
  std::map<std::string, std::string> values_;
};

// Shortest string that parses back to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

// 64-bit FNV-1a; used to fingerprint codecs and configs.
uint64_t fnv1a64(std::string_view bytes);

}  // namespace pptgnn
