#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pivotsmt/util.hpp"

namespace pivotsmt::align {

// The virtual empty word every source token may align to.
inline constexpr std::string_view kNull = "NULL";

/// IBM Model 1 translation table t(source | target). Each target token,
/// including NULL, carries a distribution over source tokens.
class Lexicon {
 public:
  double prob(std::string_view source, std::string_view target) const;
  bool contains(std::string_view source, std::string_view target) const;
  void set(std::string_view source, std::string_view target, double p);

  std::size_t size() const { return probs_.size(); }

  // Σ over source tokens of t(· | target), one value per target token.
  std::unordered_map<std::string, double> target_totals() const;

  struct Row {
    std::string source, target;
    double prob;
  };
  // Entries sorted by (source, target).
  std::vector<Row> rows() const;

  std::uint32_t source_id(std::string_view w);
  std::uint32_t target_id(std::string_view w);

 private:
  static std::uint64_t pack(std::uint32_t s, std::uint32_t t) { return (std::uint64_t{s} << 32) | t; }
  std::int64_t find_source(std::string_view w) const;
  std::int64_t find_target(std::string_view w) const;

  std::unordered_map<std::string, std::uint32_t> source_ids_, target_ids_;
  std::vector<std::string> source_words_, target_words_;
  std::unordered_map<std::uint64_t, double> probs_;
};

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);
Lexicon load_lexicon(const std::filesystem::path& path);

struct Ibm1Result {
  Lexicon lexicon;
  // Corpus log-likelihood (natural log, up to the constant length term)
  // under the parameters entering each iteration.
  std::vector<double> log_likelihood;
};

/// EM training of t(source | target) from a uniform start, with NULL
/// prepended to every target sentence. Expected counts are reduced in
/// corpus order, so results are bit-stable for a given `jobs`.
Ibm1Result train_ibm1(const std::vector<Sentence>& source, const std::vector<Sentence>& target, int iterations,
                      std::size_t jobs = 1);

/// Set of (source index, target index) links for one sentence pair.
class AlignmentMatrix {
 public:
  AlignmentMatrix() = default;
  AlignmentMatrix(std::size_t src_len, std::size_t tgt_len) : src_len_(src_len), tgt_len_(tgt_len) {}

  std::size_t src_len() const { return src_len_; }
  std::size_t tgt_len() const { return tgt_len_; }
  const std::set<std::pair<std::size_t, std::size_t>>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }
  bool empty() const { return links_.empty(); }

  // Throws AlignmentError when out of bounds.
  void add(std::size_t i, std::size_t j);
  bool contains(std::size_t i, std::size_t j) const { return links_.count({i, j}) > 0; }

  AlignmentMatrix transposed() const;

  bool operator==(const AlignmentMatrix&) const = default;

 private:
  std::size_t src_len_ = 0, tgt_len_ = 0;
  std::set<std::pair<std::size_t, std::size_t>> links_;
};

// Each source token links to its most probable target token; NULL wins only
// when strictly more probable than every real target, and NULL links are dropped.
AlignmentMatrix viterbi_align(const Sentence& source, const Sentence& target, const Lexicon& lexicon);

/// grow-diag-final-and; `reverse` must already be in (source, target) order.
AlignmentMatrix symmetrize_gdfa(const AlignmentMatrix& forward, const AlignmentMatrix& reverse);

AlignmentMatrix intersect(const AlignmentMatrix& a, const AlignmentMatrix& b);
AlignmentMatrix unite(const AlignmentMatrix& a, const AlignmentMatrix& b);

// Pharaoh format: space separated `i-j`, 0-based.
std::string format_pharaoh(const AlignmentMatrix& alignment);
AlignmentMatrix parse_pharaoh(std::string_view line, std::size_t src_len, std::size_t tgt_len);

std::vector<AlignmentMatrix> load_alignments(const std::filesystem::path& path, const std::vector<Sentence>& source,
                                             const std::vector<Sentence>& target);
void save_alignments(const std::filesystem::path& path, const std::vector<AlignmentMatrix>& alignments);

// Trains both directions, aligns, and symmetrizes every sentence pair.
std::vector<AlignmentMatrix> align_corpus(const std::vector<Sentence>& source, const std::vector<Sentence>& target,
                                          int iterations, std::size_t jobs = 1, Lexicon* forward_lexicon = nullptr,
                                          Lexicon* reverse_lexicon = nullptr);

}  // namespace pivotsmt::align
