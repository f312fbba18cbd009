#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pivotsmt/lm.hpp"
#include "pivotsmt/tm.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::decoder {

// Feature positions in every feature vector.
enum Feature : std::size_t {
  kPhraseTgivenS = 0,
  kPhraseSgivenT,
  kLexTgivenS,
  kLexSgivenT,
  kPhrasePenalty,
  kWordPenalty,
  kLanguageModel,
  kDistortion,
  kReorderPrevMonotone,
  kReorderPrevSwap,
  kReorderPrevDiscontinuous,
  kReorderNextMonotone,
  kReorderNextSwap,
  kReorderNextDiscontinuous,
};

inline constexpr std::size_t kBaseFeatureCount = 8;
inline constexpr std::size_t kFullFeatureCount = 14;

// Log-score used for any feature an option has no value for (copied words).
inline constexpr double kFloorLogScore = -10.0;

std::size_t feature_count(bool lex_reordering);
std::vector<std::string> feature_names(bool lex_reordering);

struct FeatureWeights {
  std::vector<double> lambda;

  // All 1.0 except the word penalty at 0.0.
  static FeatureWeights initial(bool lex_reordering);
  bool operator==(const FeatureWeights&) const = default;
};

// One `feature_name value` per line.
void save_weights(const FeatureWeights& weights, bool lex_reordering, const std::filesystem::path& path);
FeatureWeights load_weights(const std::filesystem::path& path, bool lex_reordering);

struct DecoderConfig {
  std::size_t beam_size = 100;
  std::optional<std::size_t> distortion_limit = 6;  // nullopt = unlimited
  std::size_t nbest_size = 100;
  bool use_lex_reordering = true;
  std::size_t max_phrase_len = 10;
  std::size_t table_limit = 20;  // options kept per source span
};

struct Models {
  const tm::PhraseTable* table = nullptr;
  const tm::ReorderingTable* reordering = nullptr;  // may be null
  const lm::NGramModel* lm = nullptr;
};

struct Translation {
  Sentence target;
  std::vector<double> features;
  double score = 0.0;
};

using NBestList = std::vector<Translation>;

/// Gap between consecutive source phrases: |next_start - prev_end - 1|.
/// prev_end is -1 before the first phrase.
double distortion_cost(long long prev_end, long long next_start);

double dot(const std::vector<double>& weights, const std::vector<double>& features);

/// Stack decoding with one stack per covered-word count, histogram pruning
/// on score plus future cost, and state recombination. Returns the best
/// complete hypothesis.
Translation decode(const Sentence& source, const Models& models, const FeatureWeights& weights,
                   const DecoderConfig& config);

/// Up to config.nbest_size distinct target strings in descending score order.
NBestList nbest(const Sentence& source, const Models& models, const FeatureWeights& weights,
                const DecoderConfig& config);

// `sentence_id ||| target ||| name:value ... ||| score` lines.
std::string format_nbest(std::size_t sentence_id, const NBestList& list, bool lex_reordering);

std::vector<Translation> decode_corpus(const std::vector<Sentence>& sources, const Models& models,
                                       const FeatureWeights& weights, const DecoderConfig& config,
                                       std::size_t jobs = 1);

// Tuning pool: per dev sentence, the distinct candidates seen so far.
struct PoolCandidate {
  Sentence target;
  std::vector<double> features;
};
using CandidatePool = std::vector<std::vector<PoolCandidate>>;

// Adds new distinct strings; returns how many were added.
std::size_t merge_into_pool(CandidatePool& pool, const std::vector<NBestList>& lists);

// Corpus BLEU of the per-sentence argmax (ties: earliest candidate).
double pool_bleu(const CandidatePool& pool, const std::vector<Sentence>& refs, const std::vector<double>& weights);

struct SweepResult {
  std::vector<double> weights;
  std::vector<double> bleu_history;  // before the first sweep, then after each
};

/// Coordinate ascent on a fixed pool: each coordinate tries 21 grid values
/// g * s for g in [-1, 3] (s = |current|, or 1 when it is 0) and moves only
/// on a strict BLEU improvement.
SweepResult optimize_on_pool(const CandidatePool& pool, const std::vector<Sentence>& refs,
                             std::vector<double> weights, int sweeps);

struct TuningResult {
  FeatureWeights weights;
  std::vector<double> bleu_history;  // pool BLEU after each round
};

/// Alternates n-best decoding of the dev set with pool optimization; stops
/// after `rounds` or once a round gains less than 0.001 BLEU.
TuningResult tune_weights(const std::vector<Sentence>& dev_src, const std::vector<Sentence>& dev_ref,
                          const Models& models, const DecoderConfig& config, int rounds, std::size_t jobs = 1);

}  // namespace pivotsmt::decoder
