#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pivotsmt::cli {

enum class KeyType {
  count,           // integer >= 0
  positive,        // integer >= 1
  real,            // finite double > 0
  fraction,        // double in (0, 1]
  boolean,         // true / false
  text,            // any non-empty string
  path,            // file or directory path
  paths,           // whitespace-separated list of paths
  optional_count,  // integer >= 0 or `none`
  seed,            // unsigned 64-bit integer
  choice,          // one of KeySpec::choices
};

struct KeySpec {
  std::string name;
  KeyType type;
  std::string default_value;  // empty: no default
  std::string help;
  std::vector<std::string> choices;
};

const std::vector<KeySpec>& key_registry();
const KeySpec* find_key(std::string_view name);

// Flag spelling of a key: max_len <-> --max-len.
std::string flag_name(std::string_view key);

/// Flat key-value settings. Only explicitly set keys are stored; getters fall
/// back to registry defaults.
class PipelineConfig {
 public:
  // Validates the key and the value; throws ConfigError naming the key.
  void set(const std::string& key, const std::string& value);
  bool has(std::string_view key) const { return values_.count(std::string(key)) > 0; }

  // Set value or default; ConfigError when neither exists.
  std::string get(std::string_view key) const;
  std::size_t count(std::string_view key) const;
  double real(std::string_view key) const;
  bool flag(std::string_view key) const;
  std::optional<std::size_t> optional_count(std::string_view key) const;
  std::uint64_t seed(std::string_view key) const;
  std::filesystem::path path(std::string_view key) const;
  std::vector<std::string> list(std::string_view key) const;

  // Values of `overrides` win.
  void merge(const PipelineConfig& overrides);

  const std::map<std::string, std::string>& values() const { return values_; }
  bool operator==(const PipelineConfig&) const = default;

 private:
  std::map<std::string, std::string> values_;
};

/// `key = value` lines; `#` starts a comment. Errors carry the line number.
PipelineConfig parse_config(std::string_view text, const std::string& origin = "config");
PipelineConfig load_config(const std::filesystem::path& path);
std::string serialize(const PipelineConfig& config);

}  // namespace pivotsmt::cli
