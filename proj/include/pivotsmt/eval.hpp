#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pivotsmt/align.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::eval {

inline constexpr int kBleuOrder = 4;

// Sufficient statistics of BLEU; corpus statistics are sums of sentence ones.
struct BleuStats {
  std::array<double, kBleuOrder> matches{};  // clipped n-gram matches
  std::array<double, kBleuOrder> totals{};   // hypothesis n-grams
  double hyp_len = 0.0;
  double ref_len = 0.0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(const Sentence& hyp, const Sentence& ref);

struct BleuReport {
  double bleu = 0.0;
  std::array<double, kBleuOrder> precisions{};
  double brevity_penalty = 1.0;
  double hyp_len = 0.0;
  double ref_len = 0.0;
};

BleuReport bleu_from_stats(const BleuStats& stats);

// Labeled multi-line text plus the `BLEU=... BP=... ratio=...` summary line.
std::string format_report(const BleuReport& report);
std::string summary_line(const BleuReport& report);

/// Corpus BLEU with clipped precisions up to 4-grams and a brevity penalty;
/// single reference per hypothesis.
BleuReport bleu_corpus(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs);

/// Sentence BLEU; orders 2-4 add one to matches and totals.
double bleu_sentence(const Sentence& hyp, const Sentence& ref);

/// Minimum-Bayes-risk choice among >= 3 candidates with loss 1 - BLEU:
/// argmin over t' of Σ_{t != t'} (1 - bleu_sentence(t', t)) * w(t).
/// Uniform weights when `posterior` is empty; ties go to the earliest candidate.
std::size_t mbr_select(const std::vector<Sentence>& candidates, const std::vector<double>& posterior = {});

// Applies mbr_select per sentence; lists[k][i] is system k's output for sentence i.
std::vector<Sentence> mbr_combine(const std::vector<std::vector<Sentence>>& lists);

enum class Winner { none, a, b };

struct SignificanceVerdict {
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  Winner confident_winner = Winner::none;

  bool operator==(const SignificanceVerdict&) const = default;
};

std::string format_verdict(const SignificanceVerdict& verdict, double level);

/// Paired bootstrap resampling over sentences. Resample r draws its indices
/// from a generator seeded by (seed, r), so verdicts are reproducible.
SignificanceVerdict bootstrap_significance(const std::vector<Sentence>& hyps_a, const std::vector<Sentence>& hyps_b,
                                           const std::vector<Sentence>& refs, std::size_t samples = 1000,
                                           double level = 0.99, std::uint64_t seed = 1, std::size_t jobs = 1);

// Inclusive source span.
struct SourceSpan {
  std::size_t first = 0, last = 0;
  std::size_t size() const { return last - first + 1; }
  bool operator==(const SourceSpan&) const = default;
};

struct Reordering {
  SourceSpan a, b;  // adjacent: a.last + 1 == b.first
  bool operator==(const Reordering&) const = default;
};

struct ReorderingSet {
  std::vector<Reordering> reorderings;
  std::size_t source_length = 0;

  // Σ (|A| + |B|) / I, or 0 for an empty sentence.
  double score() const;
};

/// Reorderings of one sentence pair by recursive binary decomposition into
/// consistent blocks, splitting each block at its leftmost consistent split.
/// Unaligned source words join their left neighbour's block (right at 0).
ReorderingSet extract_reorderings(const align::AlignmentMatrix& alignment);

struct RQuantityResult {
  double average = 0.0;
  std::vector<ReorderingSet> sentences;
};

RQuantityResult rquantity(const std::vector<align::AlignmentMatrix>& alignments);

}  // namespace pivotsmt::eval
