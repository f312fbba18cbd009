#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pivotsmt/corpus.hpp"
#include "pivotsmt/decoder.hpp"
#include "pivotsmt/pivot.hpp"

namespace pivotsmt::pipeline {

struct TrainOptions {
  int lm_order = 3;
  int ibm_iterations = 5;
  std::size_t max_phrase_len = 7;
  int tune_rounds = 5;
  decoder::DecoderConfig decoder;
  std::size_t jobs = 1;
};

struct TrainReport {
  std::size_t train_rows = 0;
  std::size_t phrase_pairs = 0;
  std::size_t reordering_entries = 0;
  std::vector<double> tuning_bleu;
};

/// LM on the target side, symmetrized IBM1 alignments, phrase and (when the
/// decoder config asks for it) reordering tables, then weight tuning on dev.
pivot::TranslationSystem train_system(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                      const std::vector<Sentence>& dev_src, const std::vector<Sentence>& dev_tgt,
                                      const TrainOptions& options, TrainReport* report = nullptr);

// Tunes an already assembled system on dev data in place.
std::vector<double> tune_system(pivot::TranslationSystem& system, const std::vector<Sentence>& dev_src,
                                const std::vector<Sentence>& dev_tgt, int rounds, std::size_t jobs);

struct PrepareOptions {
  corpus::FilterOptions filter;
  corpus::SelectionOptions selection;
  int selection_lm_order = 3;
};

/// Filters the corpus, then splits it; the selection LM is trained on the
/// selection-language column of the filtered corpus.
corpus::CorpusSplit prepare(const corpus::ParallelCorpus& corpus, const PrepareOptions& options);

}  // namespace pivotsmt::pipeline
