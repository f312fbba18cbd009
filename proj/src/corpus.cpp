#include "pivotsmt/corpus.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "pivotsmt/error.hpp"

namespace pivotsmt::corpus {
namespace {

// Decodes one code point starting at text[pos]; advances pos.
char32_t decode_utf8(std::string_view text, std::size_t& pos) {
  const std::size_t start = pos;
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  unsigned char lead = byte(pos);
  int extra = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    extra = 1, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3, cp = lead & 0x07, min = 0x10000;
  } else {
    throw DecodingError("invalid UTF-8 lead byte", start);
  }
  for (int k = 1; k <= extra; ++k) {
    if (start + k >= text.size()) throw DecodingError("truncated UTF-8 sequence", start);
    unsigned char b = byte(start + k);
    if ((b & 0xC0) != 0x80) throw DecodingError("invalid UTF-8 continuation byte", start + k);
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min) throw DecodingError("overlong UTF-8 encoding", start);
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw DecodingError("invalid code point", start);
  pos = start + extra + 1;
  return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_space(char32_t c) {
  return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
         c == 0x3000;
}

bool in(char32_t c, char32_t lo, char32_t hi) { return c >= lo && c <= hi; }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return in(c, 0x21, 0x2F) || in(c, 0x3A, 0x40) || in(c, 0x5B, 0x60) || in(c, 0x7B, 0x7E);
  }
  if (in(c, 0xA1, 0xBF)) {
    // Ordinal indicators, micro sign, superscripts and vulgar fractions are word characters.
    return c != 0xAA && c != 0xBA && c != 0xB5 && c != 0xB2 && c != 0xB3 && c != 0xB9 && !in(c, 0xBC, 0xBE);
  }
  return c == 0xD7 || c == 0xF7 || c == 0x060C || c == 0x061B || c == 0x061F || in(c, 0x066A, 0x066D) ||
         c == 0x06D4 || in(c, 0x2010, 0x2027) || in(c, 0x2030, 0x205E) || in(c, 0x20A0, 0x20CF) ||
         in(c, 0x2E00, 0x2E7F) || in(c, 0x3001, 0x3003) || in(c, 0x3008, 0x3011) || in(c, 0x3014, 0x301F) ||
         in(c, 0xFF01, 0xFF0F) || in(c, 0xFF1A, 0xFF20) || in(c, 0xFF3B, 0xFF40) || in(c, 0xFF5B, 0xFF65);
}

char32_t to_lower(char32_t c) {
  if (in(c, 'A', 'Z')) return c + 0x20;
  if (in(c, 0xC0, 0xDE) && c != 0xD7) return c + 0x20;
  if ((in(c, 0x100, 0x137) || in(c, 0x14A, 0x177)) && c % 2 == 0) return c + 1;
  if ((in(c, 0x139, 0x148) || in(c, 0x179, 0x17E)) && c % 2 == 1) return c + 1;
  if (c == 0x178) return 0xFF;
  if (in(c, 0x391, 0x3A9) && c != 0x3A2) return c + 0x20;
  if (in(c, 0x410, 0x42F)) return c + 0x20;
  if (in(c, 0x400, 0x40F)) return c + 0x50;
  return c;
}

}  // namespace

TokenizerProfile parse_profile(std::string_view name) {
  if (name == "plain") return TokenizerProfile::plain;
  if (name == "lowercase") return TokenizerProfile::lowercase;
  if (name == "pretokenized") return TokenizerProfile::pretokenized;
  throw ConfigError("unknown tokenizer profile '" + std::string(name) + "'");
}

std::string_view profile_name(TokenizerProfile profile) {
  switch (profile) {
    case TokenizerProfile::plain: return "plain";
    case TokenizerProfile::lowercase: return "lowercase";
    case TokenizerProfile::pretokenized: return "pretokenized";
  }
  return "plain";
}

Sentence tokenize(std::string_view raw_line, TokenizerProfile profile) {
  Sentence tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < raw_line.size()) {
    char32_t cp = decode_utf8(raw_line, pos);
    if (is_space(cp)) {
      flush();
      continue;
    }
    if (profile == TokenizerProfile::pretokenized) {
      encode_utf8(cp, current);
      continue;
    }
    if (profile == TokenizerProfile::lowercase) cp = to_lower(cp);
    if (is_punct(cp)) {
      flush();
      encode_utf8(cp, current);
      flush();
    } else {
      encode_utf8(cp, current);
    }
  }
  flush();
  return tokens;
}

ParallelCorpus::ParallelCorpus(std::vector<std::string> languages) : languages_(std::move(languages)) {
  for (std::size_t i = 0; i < languages_.size(); ++i) {
    for (std::size_t j = i + 1; j < languages_.size(); ++j) {
      if (languages_[i] == languages_[j]) throw ConfigError("duplicate language tag '" + languages_[i] + "'");
    }
  }
}

std::size_t ParallelCorpus::language_index(std::string_view tag) const {
  auto it = std::find(languages_.begin(), languages_.end(), tag);
  if (it == languages_.end()) throw ConfigError("language '" + std::string(tag) + "' not in corpus");
  return static_cast<std::size_t>(it - languages_.begin());
}

void ParallelCorpus::add_row(std::vector<Sentence> row) {
  if (row.size() != languages_.size()) {
    throw DataError("row has " + std::to_string(row.size()) + " sides, corpus has " +
                    std::to_string(languages_.size()) + " languages");
  }
  rows_.push_back(std::move(row));
}

std::vector<Sentence> ParallelCorpus::column(std::string_view tag) const {
  std::size_t k = language_index(tag);
  std::vector<Sentence> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[k]);
  return out;
}

ParallelCorpus ParallelCorpus::project(const std::vector<std::string>& tags) const {
  std::vector<std::size_t> idx;
  for (const auto& t : tags) idx.push_back(language_index(t));
  ParallelCorpus out(tags);
  for (const auto& r : rows_) {
    std::vector<Sentence> row;
    for (auto k : idx) row.push_back(r[k]);
    out.add_row(std::move(row));
  }
  return out;
}

std::filesystem::path language_file(const std::filesystem::path& prefix, std::string_view lang) {
  auto p = prefix;
  p += ".";
  p += std::string(lang);
  return p;
}

ParallelCorpus load_corpus(const std::filesystem::path& prefix, const std::vector<std::string>& languages,
                           TokenizerProfile profile) {
  ParallelCorpus corpus(languages);
  std::vector<std::vector<std::string>> lines;
  for (const auto& lang : languages) lines.push_back(read_lines(language_file(prefix, lang)));
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].size() != lines[0].size()) {
      throw DataError("corpus files are not line-aligned: " + language_file(prefix, languages[0]).string() +
                      " has " + std::to_string(lines[0].size()) + " lines, " +
                      language_file(prefix, languages[k]).string() + " has " + std::to_string(lines[k].size()));
    }
  }
  std::size_t n = lines.empty() ? 0 : lines[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Sentence> row;
    for (std::size_t k = 0; k < languages.size(); ++k) {
      try {
        row.push_back(tokenize(lines[k][i], profile));
      } catch (const DecodingError& e) {
        throw DataError(language_file(prefix, languages[k]).string() + " line " + std::to_string(i + 1) + ": " +
                        e.what());
      }
    }
    corpus.add_row(std::move(row));
  }
  return corpus;
}

void save_corpus(const ParallelCorpus& corpus, const std::filesystem::path& prefix) {
  for (const auto& lang : corpus.languages()) write_sentences(language_file(prefix, lang), corpus.column(lang));
}

ParallelCorpus filter_corpus(const ParallelCorpus& corpus, const FilterOptions& options) {
  const std::size_t pivot = corpus.language_index(options.pivot_lang);
  ParallelCorpus out(corpus.languages());
  for (const auto& row : corpus.rows()) {
    bool keep = true;
    for (const auto& side : row) {
      if (side.empty() || side.size() > options.max_len) keep = false;
    }
    for (std::size_t k = 0; keep && k < row.size(); ++k) {
      if (k == pivot) continue;
      double a = static_cast<double>(row[k].size());
      double b = static_cast<double>(row[pivot].size());
      if (a > options.max_ratio * b || b > options.max_ratio * a) keep = false;
    }
    if (keep) out.add_row(row);
  }
  return out;
}

std::vector<CandidateScore> score_candidates(const ParallelCorpus& corpus, const lm::NGramModel& model,
                                             std::string_view selection_lang) {
  const std::size_t sel = corpus.language_index(selection_lang);
  const std::size_t langs = corpus.languages().size();
  std::vector<std::unordered_map<std::string, std::size_t>> freq(langs);
  std::vector<std::vector<std::string>> keys(langs);
  for (std::size_t k = 0; k < langs; ++k) {
    keys[k].reserve(corpus.size());
    for (const auto& row : corpus.rows()) {
      keys[k].push_back(join(row[k]));
      ++freq[k][keys[k].back()];
    }
  }
  std::vector<CandidateScore> out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool unique = true;
    for (std::size_t k = 0; k < langs && unique; ++k) unique = freq[k][keys[k][i]] == 1;
    const Sentence& s = corpus.row(i)[sel];
    if (!unique || s.empty()) continue;
    std::size_t oov = 0;
    for (const auto& w : s) oov += model.contains(w) ? 0 : 1;
    out.push_back({i, lm::perplexity(model, s), static_cast<double>(oov) / static_cast<double>(s.size())});
  }
  return out;
}

CorpusSplit select_dev_test(const ParallelCorpus& corpus, const lm::NGramModel& model,
                            const SelectionOptions& options) {
  auto candidates = score_candidates(corpus, model, options.selection_lang);
  const std::size_t wanted = options.dev_size + options.test_size;
  if (wanted > candidates.size()) {
    throw SelectionError("dev+test size " + std::to_string(wanted) + " exceeds the " +
                             std::to_string(candidates.size()) + " rows that are unique in every language",
                         candidates.size());
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.perplexity > b.perplexity; });
  std::size_t pool = std::min(candidates.size(), std::max<std::size_t>(1, options.pool_factor) * wanted);
  candidates.resize(pool);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const CandidateScore& a, const CandidateScore& b) { return a.oov_ratio < b.oov_ratio; });

  CorpusSplit split{ParallelCorpus(corpus.languages()), ParallelCorpus(corpus.languages()),
                    ParallelCorpus(corpus.languages()), {}, {}, {}};
  std::vector<int> role(corpus.size(), 0);
  for (std::size_t i = 0; i < options.dev_size; ++i) role[candidates[i].row] = 1;
  for (std::size_t i = options.dev_size; i < wanted; ++i) role[candidates[i].row] = 2;
  for (std::size_t i = 0; i < options.dev_size; ++i) {
    split.dev.add_row(corpus.row(candidates[i].row));
    split.dev_rows.push_back(candidates[i].row);
  }
  for (std::size_t i = options.dev_size; i < wanted; ++i) {
    split.test.add_row(corpus.row(candidates[i].row));
    split.test_rows.push_back(candidates[i].row);
  }
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (role[i] != 0) continue;
    split.train.add_row(corpus.row(i));
    split.train_rows.push_back(i);
  }
  return split;
}

}  // namespace pivotsmt::corpus
