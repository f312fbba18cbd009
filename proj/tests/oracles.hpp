#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pivotsmt/align.hpp"
#include "pivotsmt/corpus.hpp"
#include "pivotsmt/decoder.hpp"
#include "pivotsmt/lm.hpp"
#include "pivotsmt/tm.hpp"

namespace oracle {

using pivotsmt::Sentence;

struct Rand {
  explicit Rand(std::uint64_t seed) : engine(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine() % n); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * std::uniform_real_distribution<double>(0, 1)(engine); }
  std::mt19937_64 engine;
};

// (src_first, src_last, tgt_first, tgt_last) of every tight consistent span pair.
using SpanBox = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
std::set<SpanBox> phrase_boxes(std::size_t src_len, std::size_t tgt_len, const pivotsmt::align::AlignmentMatrix& a,
                               std::size_t max_len);

pivotsmt::align::AlignmentMatrix random_alignment(Rand& rng, std::size_t src_len, std::size_t tgt_len,
                                                  double density);

struct Derivation {
  std::string target;
  std::vector<double> features;
  double score;
};

/// Every derivation over every segmentation and order within the distortion
/// limit; the best derivation per target string, sorted by (score desc, string asc).
std::vector<Derivation> enumerate_translations(const Sentence& source, const pivotsmt::decoder::Models& models,
                                               const pivotsmt::decoder::FeatureWeights& weights,
                                               const pivotsmt::decoder::DecoderConfig& config);

struct ToyInstance {
  Sentence source;
  pivotsmt::tm::PhraseTable table;
  pivotsmt::tm::ReorderingTable reordering;
  pivotsmt::lm::NGramModel lm;
  pivotsmt::decoder::FeatureWeights weights;
  pivotsmt::decoder::DecoderConfig config;
};
ToyInstance random_toy_instance(Rand& rng, bool lex_reordering);

/// Explicit sum over (s, p, t) triples, scanning the whole pivot-target table.
pivotsmt::tm::PhraseTable triple_loop_triangulation(const pivotsmt::tm::PhraseTable& sp,
                                                    const pivotsmt::tm::PhraseTable& pt);
pivotsmt::tm::PhraseTable random_table(Rand& rng, const std::vector<std::string>& src_vocab,
                                       const std::vector<std::string>& tgt_vocab, std::size_t entries);

/// Canonical decomposition score for a permutation (pi[i] = target of source i).
double permutation_rquantity(const std::vector<std::size_t>& pi);

// Index minimizing sum_{t != t'} (1 - sentence_bleu(t', t)) w(t); first on ties.
std::size_t mbr_brute_force(const std::vector<Sentence>& candidates, const std::vector<double>& weights = {});

// Smoothed sentence BLEU computed from scratch.
double sentence_bleu(const Sentence& hyp, const Sentence& ref);

struct SelectionResult {
  std::vector<std::size_t> dev, test;
};
SelectionResult select_rows(const pivotsmt::corpus::ParallelCorpus& corpus, const pivotsmt::lm::NGramModel& lm,
                            const std::string& lang, std::size_t dev_size, std::size_t test_size,
                            std::size_t pool_factor);

}  // namespace oracle
