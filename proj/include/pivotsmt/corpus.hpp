#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pivotsmt/lm.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::corpus {

enum class TokenizerProfile {
  plain,         // split punctuation from word characters
  lowercase,     // plain + lowercasing
  pretokenized,  // whitespace split only
};

TokenizerProfile parse_profile(std::string_view name);
std::string_view profile_name(TokenizerProfile profile);

/// Tokenizes one line of UTF-8 text. Every punctuation code point becomes its
/// own token; runs of letters, digits and other symbols stay together.
/// Throws DecodingError on malformed UTF-8.
Sentence tokenize(std::string_view raw_line, TokenizerProfile profile);

// Line-aligned sentences across several languages.
class ParallelCorpus {
 public:
  ParallelCorpus() = default;
  explicit ParallelCorpus(std::vector<std::string> languages);

  const std::vector<std::string>& languages() const { return languages_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  // Index of a language tag; throws ConfigError if absent.
  std::size_t language_index(std::string_view tag) const;

  void add_row(std::vector<Sentence> row);
  const std::vector<Sentence>& row(std::size_t i) const { return rows_[i]; }
  const std::vector<std::vector<Sentence>>& rows() const { return rows_; }

  std::vector<Sentence> column(std::string_view tag) const;
  // Sub-corpus over a subset of languages, in the given order.
  ParallelCorpus project(const std::vector<std::string>& tags) const;

  bool operator==(const ParallelCorpus&) const = default;

 private:
  std::vector<std::string> languages_;
  std::vector<std::vector<Sentence>> rows_;
};

// Reads `<prefix>.<lang>` for each language; files must have equal line counts.
ParallelCorpus load_corpus(const std::filesystem::path& prefix, const std::vector<std::string>& languages,
                           TokenizerProfile profile = TokenizerProfile::pretokenized);
void save_corpus(const ParallelCorpus& corpus, const std::filesystem::path& prefix);
std::filesystem::path language_file(const std::filesystem::path& prefix, std::string_view lang);

struct FilterOptions {
  std::size_t max_len = 100;
  double max_ratio = 3.0;
  std::string pivot_lang;
};

/// Drops every row where some side is empty or longer than max_len, or where
/// the pivot side and any other side differ in length by more than max_ratio.
ParallelCorpus filter_corpus(const ParallelCorpus& corpus, const FilterOptions& options);

struct SelectionOptions {
  std::string selection_lang;
  std::size_t dev_size = 0;
  std::size_t test_size = 0;
  std::size_t pool_factor = 2;
};

struct CorpusSplit {
  ParallelCorpus train;
  ParallelCorpus dev;
  ParallelCorpus test;
  // Original row indices of each part.
  std::vector<std::size_t> train_rows, dev_rows, test_rows;
};

struct CandidateScore {
  std::size_t row = 0;
  double perplexity = 0.0;
  double oov_ratio = 0.0;
};

// Rows whose sentence is unique within its column for every language, scored
// on the selection language. Rows with an empty selection sentence are skipped.
std::vector<CandidateScore> score_candidates(const ParallelCorpus& corpus, const lm::NGramModel& model,
                                             std::string_view selection_lang);

/// Picks dev and test rows: the highest-perplexity candidates form a pool of
/// pool_factor * (dev + test) rows, the pool is re-ranked by ascending OOV
/// ratio, and dev then test are taken from its head. Everything else trains.
CorpusSplit select_dev_test(const ParallelCorpus& corpus, const lm::NGramModel& model,
                            const SelectionOptions& options);

}  // namespace pivotsmt::corpus
