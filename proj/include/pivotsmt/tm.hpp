#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pivotsmt/align.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::tm {

// Unseen lexicon entries contribute this probability to lexical weights.
inline constexpr double kLexicalFloor = 1e-7;
inline constexpr double kReorderingSmoothing = 0.5;

/// A consistent phrase pair with its inclusive spans in the sentence pair.
struct PhrasePair {
  Phrase src, tgt;
  std::size_t src_first = 0, src_last = 0;
  std::size_t tgt_first = 0, tgt_last = 0;

  auto operator<=>(const PhrasePair&) const = default;
};

/// All phrase pairs whose spans are consistent with the alignment, have at
/// most max_len tokens per side, and start and end on aligned words on both
/// sides. Sorted by (src_first, src_last, tgt_first, tgt_last).
std::vector<PhrasePair> extract_phrases(const Sentence& src, const Sentence& tgt,
                                        const align::AlignmentMatrix& alignment, std::size_t max_len = 10);

// Links of the sentence alignment that fall inside the pair's spans, re-indexed
// relative to the phrase starts.
align::AlignmentMatrix phrase_links(const PhrasePair& pair, const align::AlignmentMatrix& alignment);

/// Lexical weight lex(src | tgt): for every source word, the mean
/// of w(src_i | tgt_j) over its links, or w(src_i | NULL) when unlinked;
/// multiplied over source positions. `lexicon.prob(s, t)` is read as w(s | t).
double lexical_weight(const PhrasePair& pair, const align::AlignmentMatrix& links, const align::Lexicon& lexicon);

struct PhraseScores {
  double p_s_given_t = 0.0;
  double lex_s_given_t = 0.0;
  double p_t_given_s = 0.0;
  double lex_t_given_s = 0.0;
  double joint_count = 0.0;
  double src_count = 0.0;
  double tgt_count = 0.0;

  bool operator==(const PhraseScores&) const = default;
};

class PhraseTable {
 public:
  struct Option {
    Phrase target;
    PhraseScores scores;

    bool operator==(const Option&) const = default;
  };

  // Replaces any existing (src, tgt) entry.
  void add(const Phrase& src, const Phrase& tgt, const PhraseScores& scores);

  // Options for a source phrase (space-joined), sorted by target string; null if absent.
  const std::vector<Option>* find(const std::string& src_key) const;
  const std::map<std::string, std::vector<Option>>& entries() const { return entries_; }

  std::size_t source_count() const { return entries_.size(); }
  std::size_t size() const;
  bool empty() const { return entries_.empty(); }

  // Swaps source and target sides along with every directional score.
  PhraseTable inverted() const;

  bool operator==(const PhraseTable&) const = default;

 private:
  std::map<std::string, std::vector<Option>> entries_;
};

void write_table(const PhraseTable& table, std::ostream& out);
PhraseTable read_table(std::istream& in);
void save_table(const PhraseTable& table, const std::filesystem::path& path);
PhraseTable load_table(const std::filesystem::path& path);

/// Relative frequencies over every extracted phrase occurrence plus lexical
/// weights in both directions. lex_fwd holds w(src | tgt), lex_rev w(tgt | src);
/// each pair keeps the largest weight over its occurrences.
PhraseTable build_phrase_table(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                               const std::vector<align::AlignmentMatrix>& alignments, const align::Lexicon& lex_fwd,
                               const align::Lexicon& lex_rev, std::size_t max_len = 10, std::size_t jobs = 1);

enum class Orientation { monotone = 0, swap = 1, discontinuous = 2 };

std::string_view orientation_name(Orientation o);

// Word-based orientation relative to the previous / next target-adjacent phrase.
// Sentence boundaries count as monotone.
Orientation orientation_with_previous(const PhrasePair& pair, const align::AlignmentMatrix& alignment);
Orientation orientation_with_next(const PhrasePair& pair, const align::AlignmentMatrix& alignment);

struct LexReorderingEntry {
  std::array<double, 3> previous{};  // indexed by Orientation
  std::array<double, 3> next{};

  bool operator==(const LexReorderingEntry&) const = default;
};

class ReorderingTable {
 public:
  void add(const Phrase& src, const Phrase& tgt, const LexReorderingEntry& entry);
  const LexReorderingEntry* find(const std::string& src_key, const std::string& tgt_key) const;
  const std::map<std::pair<std::string, std::string>, LexReorderingEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  bool operator==(const ReorderingTable&) const = default;

 private:
  std::map<std::pair<std::string, std::string>, LexReorderingEntry> entries_;
};

/// Orientation counts over every phrase occurrence, add-sigma smoothed.
ReorderingTable estimate_lex_reordering(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                        const std::vector<align::AlignmentMatrix>& alignments,
                                        std::size_t max_len = 10, double sigma = kReorderingSmoothing);

void write_reordering(const ReorderingTable& table, std::ostream& out);
ReorderingTable read_reordering(std::istream& in);
void save_reordering(const ReorderingTable& table, const std::filesystem::path& path);
ReorderingTable load_reordering(const std::filesystem::path& path);

}  // namespace pivotsmt::tm
