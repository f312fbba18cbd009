#include "pivotsmt/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pivotsmt/error.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::cli {
namespace {

std::vector<KeySpec> make_registry() {
  using T = KeyType;
  return {
      {"jobs", T::positive, "", "worker threads (default: PIVOTSMT_JOBS or 1)", {}},
      {"report", T::path, "", "report file (default: report.txt next to the outputs)", {}},
      // corpus
      {"corpus", T::path, "", "corpus prefix; files are <prefix>.<lang>", {}},
      {"langs", T::paths, "", "language tags of the corpus", {}},
      {"source_lang", T::text, "src", "source language tag", {}},
      {"target_lang", T::text, "tgt", "target language tag", {}},
      {"pivot_lang", T::text, "", "pivot language tag", {}},
      {"selection_lang", T::text, "", "language scored for dev/test selection (default: source_lang)", {}},
      {"profile", T::choice, "plain", "tokenizer profile", {"plain", "lowercase", "pretokenized"}},
      {"max_len", T::positive, "100", "maximum tokens per side", {}},
      {"max_ratio", T::real, "3", "maximum length ratio against the pivot side", {}},
      {"dev_size", T::count, "100", "dev rows", {}},
      {"test_size", T::count, "100", "test rows", {}},
      {"pool_factor", T::positive, "2", "high-perplexity pool size as a multiple of dev+test", {}},
      // models
      {"order", T::positive, "3", "n-gram order", {}},
      {"ibm_iterations", T::positive, "5", "IBM Model 1 EM iterations", {}},
      {"max_phrase_len", T::positive, "7", "maximum phrase length", {}},
      // decoder
      {"beam_size", T::positive, "100", "hypotheses kept per stack", {}},
      {"distortion_limit", T::optional_count, "6", "maximum jump, or none", {}},
      {"nbest_size", T::positive, "100", "n-best list size", {}},
      {"use_lex_reordering", T::boolean, "true", "lexicalized reordering features", {}},
      {"table_limit", T::positive, "20", "translation options per source span", {}},
      {"tune_rounds", T::count, "5", "tuning rounds", {}},
      // pivot
      {"top_k", T::optional_count, "none", "pivot phrases joined per source phrase, or none", {}},
      {"strategy", T::choice, "all", "pivot strategy", {"cascade", "pseudo", "triangulation", "all"}},
      // evaluation
      {"samples", T::positive, "1000", "bootstrap resamples", {}},
      {"level", T::fraction, "0.99", "confidence level", {}},
      {"seed", T::seed, "1", "random seed", {}},
      {"sentences", T::positive, "2000", "fixture rows", {}},
      // files
      {"in", T::path, "", "input file", {}},
      {"out", T::path, "", "output file, prefix or directory", {}},
      {"hyp", T::path, "", "hypothesis file", {}},
      {"ref", T::path, "", "reference file", {}},
      {"a", T::path, "", "output of system A", {}},
      {"b", T::path, "", "output of system B", {}},
      {"src", T::path, "", "source sentences", {}},
      {"tgt", T::path, "", "target sentences", {}},
      {"align", T::path, "", "alignment file or directory", {}},
      {"tm", T::path, "", "translation model directory", {}},
      {"lm", T::path, "", "ARPA language model", {}},
      {"system", T::path, "", "system directory", {}},
      {"dev_src", T::path, "", "dev source sentences", {}},
      {"dev_ref", T::path, "", "dev reference sentences", {}},
      {"nbest_out", T::path, "", "n-best output file", {}},
      {"sp", T::path, "", "source-pivot phrase table", {}},
      {"pt", T::path, "", "pivot-target phrase table", {}},
      {"sp_sys", T::path, "", "source-pivot system directory", {}},
      {"pt_sys", T::path, "", "pivot-target system directory", {}},
      {"sp_corpus", T::path, "", "source-pivot corpus prefix", {}},
      {"lists", T::paths, "", "system outputs to combine", {}},
      {"work_dir", T::path, "", "pipeline working directory", {}},
  };
}

std::string describe(const KeySpec& spec) {
  switch (spec.type) {
    case KeyType::count: return "an integer >= 0";
    case KeyType::positive: return "an integer >= 1";
    case KeyType::real: return "a number > 0";
    case KeyType::fraction: return "a number in (0, 1]";
    case KeyType::boolean: return "true or false";
    case KeyType::optional_count: return "an integer >= 0 or none";
    case KeyType::seed: return "an unsigned 64-bit integer";
    case KeyType::choice: return "one of " + join(spec.choices, ", ");
    default: return "a non-empty value";
  }
}

bool valid(const KeySpec& spec, const std::string& v) {
  if (v.empty()) return false;
  try {
    switch (spec.type) {
      case KeyType::count: return parse_int(v) >= 0;
      case KeyType::positive: return parse_int(v) >= 1;
      case KeyType::real: {
        double d = parse_double(v);
        return std::isfinite(d) && d > 0;
      }
      case KeyType::fraction: {
        double d = parse_double(v);
        return d > 0 && d <= 1;
      }
      case KeyType::boolean: return v == "true" || v == "false";
      case KeyType::optional_count: return v == "none" || parse_int(v) >= 0;
      case KeyType::seed: {
        std::size_t pos = 0;
        if (v.front() == '-') return false;
        std::stoull(v, &pos);
        return pos == v.size();
      }
      case KeyType::choice: return std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end();
      default: return true;
    }
  } catch (const std::exception&) {
    return false;
  }
}

const KeySpec& require_key(std::string_view key) {
  const KeySpec* spec = find_key(key);
  if (spec == nullptr) throw ConfigError("unknown key: " + std::string(key));
  return *spec;
}

}  // namespace

const std::vector<KeySpec>& key_registry() {
  static const std::vector<KeySpec> registry = make_registry();
  return registry;
}

const KeySpec* find_key(std::string_view name) {
  for (const auto& spec : key_registry())
    if (spec.name == name) return &spec;
  return nullptr;
}

std::string flag_name(std::string_view key) {
  std::string out = "--";
  for (char c : key) out += c == '_' ? '-' : c;
  return out;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const KeySpec& spec = require_key(key);
  std::string v(trim(value));
  if (spec.type == KeyType::paths) v = join(split_ws(v));
  if (!valid(spec, v)) throw ConfigError("invalid value for " + key + ": `" + v + "` (expected " + describe(spec) + ")");
  values_[key] = v;
}

std::string PipelineConfig::get(std::string_view key) const {
  const KeySpec& spec = require_key(key);
  if (auto it = values_.find(std::string(key)); it != values_.end()) return it->second;
  if (key == "jobs") return std::to_string(default_jobs());
  if (key == "selection_lang") return get("source_lang");
  if (spec.default_value.empty()) throw ConfigError("missing required key: " + spec.name);
  return spec.default_value;
}

std::size_t PipelineConfig::count(std::string_view key) const { return static_cast<std::size_t>(parse_int(get(key))); }
double PipelineConfig::real(std::string_view key) const { return parse_double(get(key)); }
bool PipelineConfig::flag(std::string_view key) const { return get(key) == "true"; }

std::optional<std::size_t> PipelineConfig::optional_count(std::string_view key) const {
  std::string v = get(key);
  if (v == "none") return std::nullopt;
  return static_cast<std::size_t>(parse_int(v));
}

std::uint64_t PipelineConfig::seed(std::string_view key) const { return std::stoull(get(key)); }
std::filesystem::path PipelineConfig::path(std::string_view key) const { return get(key); }
std::vector<std::string> PipelineConfig::list(std::string_view key) const { return split_ws(get(key)); }

void PipelineConfig::merge(const PipelineConfig& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

PipelineConfig parse_config(std::string_view text, const std::string& origin) {
  PipelineConfig config;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw ConfigError(where + "malformed line, expected `key = value`");
    std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + "malformed line, missing key");
    try {
      config.set(key, std::string(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::string serialize(const PipelineConfig& config) {
  std::string out;
  for (const auto& [k, v] : config.values()) out += k + " = " + v + '\n';
  return out;
}

}  // namespace pivotsmt::cli
