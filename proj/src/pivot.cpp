#include "pivotsmt/pivot.hpp"

#include <algorithm>
#include <map>

#include "pivotsmt/log.hpp"

namespace pivotsmt::pivot {

namespace fs = std::filesystem;

std::vector<Sentence> TranslationSystem::translate(const std::vector<Sentence>& sources, std::size_t jobs) const {
  auto m = models();
  auto out = decoder::decode_corpus(sources, m, weights, config, jobs);
  std::vector<Sentence> targets;
  targets.reserve(out.size());
  for (auto& t : out) targets.push_back(std::move(t.target));
  return targets;
}

std::string format_decoder_config(const decoder::DecoderConfig& c) {
  std::string out;
  out += "beam_size = " + std::to_string(c.beam_size) + '\n';
  out += "distortion_limit = " + (c.distortion_limit ? std::to_string(*c.distortion_limit) : std::string("none")) + '\n';
  out += "nbest_size = " + std::to_string(c.nbest_size) + '\n';
  out += std::string("use_lex_reordering = ") + (c.use_lex_reordering ? "true" : "false") + '\n';
  out += "max_phrase_len = " + std::to_string(c.max_phrase_len) + '\n';
  out += "table_limit = " + std::to_string(c.table_limit) + '\n';
  return out;
}

decoder::DecoderConfig parse_decoder_config(const std::vector<std::string>& lines) {
  decoder::DecoderConfig c;
  auto count = [](const std::string& key, std::string_view v) {
    long long n = 0;
    try {
      n = parse_int(v);
    } catch (const Error&) {
      throw ConfigError("decoder config: " + key + " must be an integer");
    }
    if (n < 0) throw ConfigError("decoder config: " + key + " must be >= 0");
    return static_cast<std::size_t>(n);
  };
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string uncommented = lines[i].substr(0, lines[i].find('#'));
    std::string_view line = trim(uncommented);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("decoder config line " + std::to_string(i + 1) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key == "beam_size") {
      c.beam_size = count(key, value);
    } else if (key == "distortion_limit") {
      if (value == "none") {
        c.distortion_limit.reset();
      } else {
        c.distortion_limit = count(key, value);
      }
    } else if (key == "nbest_size") {
      c.nbest_size = count(key, value);
    } else if (key == "use_lex_reordering") {
      if (value != "true" && value != "false") throw ConfigError("decoder config: use_lex_reordering must be true/false");
      c.use_lex_reordering = value == "true";
    } else if (key == "max_phrase_len") {
      c.max_phrase_len = count(key, value);
    } else if (key == "table_limit") {
      c.table_limit = count(key, value);
    } else {
      throw ConfigError("decoder config: unknown key " + key);
    }
  }
  return c;
}

void save_system(const TranslationSystem& system, const fs::path& dir) {
  fs::create_directories(dir);
  tm::save_table(system.table, dir / "phrase-table.txt");
  if (system.reordering) {
    tm::save_reordering(*system.reordering, dir / "reordering-table.txt");
  } else {
    fs::remove(dir / "reordering-table.txt");
  }
  lm::save_arpa(system.lm, dir / "lm.arpa");
  decoder::save_weights(system.weights, system.config.use_lex_reordering, dir / "weights.txt");
  write_file_atomic(dir / "decoder.cfg", format_decoder_config(system.config));
}

TranslationSystem load_system(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("system directory not found: " + dir.string());
  TranslationSystem s;
  s.config = parse_decoder_config(read_lines(dir / "decoder.cfg"));
  s.table = tm::load_table(dir / "phrase-table.txt");
  if (fs::exists(dir / "reordering-table.txt")) s.reordering = tm::load_reordering(dir / "reordering-table.txt");
  if (s.config.use_lex_reordering && !s.reordering) {
    throw ConfigError(dir.string() + ": lexicalized reordering enabled but reordering-table.txt is missing");
  }
  s.lm = lm::load_arpa(dir / "lm.arpa");
  s.weights = decoder::load_weights(dir / "weights.txt", s.config.use_lex_reordering);
  return s;
}

std::vector<Sentence> cascade_translate(const std::vector<Sentence>& sources, const TranslationSystem& sys_sp,
                                        const TranslationSystem& sys_pt, std::size_t jobs) {
  std::vector<Sentence> pivots;
  try {
    pivots = sys_sp.translate(sources, jobs);
  } catch (const Error& e) {
    throw StageError("sp", e);
  }
  try {
    return sys_pt.translate(pivots, jobs);
  } catch (const Error& e) {
    throw StageError("pt", e);
  }
}

corpus::ParallelCorpus build_pseudo_corpus(const corpus::ParallelCorpus& bitext_sp, const std::string& source_lang,
                                   const std::string& pivot_lang, const std::string& target_lang,
                                   const TranslationSystem& sys_pt, PseudoCorpusReport* report, std::size_t jobs) {
  auto sources = bitext_sp.column(source_lang);
  auto targets = sys_pt.translate(bitext_sp.column(pivot_lang), jobs);
  corpus::ParallelCorpus out({source_lang, target_lang});
  PseudoCorpusReport r;
  r.rows = sources.size();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (targets[i].empty()) r.empty_rows.push_back(i);
    out.add_row({sources[i], targets[i]});
  }
  if (!r.empty_rows.empty()) {
    log::warn(std::to_string(r.empty_rows.size()) + " pseudo-corpus rows have an empty translation");
  }
  if (report) *report = std::move(r);
  return out;
}

tm::PhraseTable triangulate(const tm::PhraseTable& table_sp, const tm::PhraseTable& table_pt,
                            std::optional<std::size_t> top_k, std::size_t jobs) {
  struct Joined {
    Phrase target;
    tm::PhraseScores scores;
  };
  std::vector<const std::pair<const std::string, std::vector<tm::PhraseTable::Option>>*> sources;
  for (const auto& entry : table_sp.entries()) sources.push_back(&entry);

  auto rows = parallel_map(sources.size(), jobs, [&](std::size_t i) {
    std::vector<const tm::PhraseTable::Option*> pivots;
    for (const auto& o : sources[i]->second) pivots.push_back(&o);
    if (top_k && pivots.size() > *top_k) {
      std::stable_sort(pivots.begin(), pivots.end(), [](const auto* a, const auto* b) {
        return a->scores.p_t_given_s > b->scores.p_t_given_s;
      });
      pivots.resize(*top_k);
      std::stable_sort(pivots.begin(), pivots.end(), [](const auto* a, const auto* b) { return a->target < b->target; });
    }
    std::map<std::string, Joined> joined;
    for (const auto* sp : pivots) {
      const auto* pt_options = table_pt.find(join(sp->target));
      if (pt_options == nullptr) continue;
      for (const auto& pt : *pt_options) {
        auto& j = joined[join(pt.target)];
        j.target = pt.target;
        j.scores.p_t_given_s += pt.scores.p_t_given_s * sp->scores.p_t_given_s;
        j.scores.p_s_given_t += sp->scores.p_s_given_t * pt.scores.p_s_given_t;
        j.scores.lex_t_given_s += pt.scores.lex_t_given_s * sp->scores.lex_t_given_s;
        j.scores.lex_s_given_t += sp->scores.lex_s_given_t * pt.scores.lex_s_given_t;
        j.scores.joint_count += std::min(sp->scores.joint_count, pt.scores.joint_count);
      }
    }
    return joined;
  });

  std::map<std::string, double> target_totals;
  for (const auto& row : rows)
    for (const auto& [key, j] : row) target_totals[key] += j.scores.joint_count;

  tm::PhraseTable out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    double source_total = 0.0;
    for (const auto& [key, j] : rows[i]) source_total += j.scores.joint_count;
    Phrase src = split_ws(sources[i]->first);
    for (auto& [key, j] : rows[i]) {
      j.scores.src_count = source_total;
      j.scores.tgt_count = target_totals[key];
      out.add(src, j.target, j.scores);
    }
  }
  if (out.empty()) log::warn("triangulation produced an empty table: no shared pivot phrases");
  return out;
}

}  // namespace pivotsmt::pivot
