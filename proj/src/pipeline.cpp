#include "pivotsmt/pipeline.hpp"

#include "pivotsmt/align.hpp"
#include "pivotsmt/lm.hpp"
#include "pivotsmt/tm.hpp"

namespace pivotsmt::pipeline {

pivot::TranslationSystem train_system(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                      const std::vector<Sentence>& dev_src, const std::vector<Sentence>& dev_tgt,
                                      const TrainOptions& options, TrainReport* report) {
  if (src.size() != tgt.size()) throw TrainingError("source and target training data differ in length");
  pivot::TranslationSystem system;
  system.config = options.decoder;
  system.config.max_phrase_len = options.max_phrase_len;
  system.lm = lm::train_kn(tgt, options.lm_order);

  align::Lexicon lex_fwd, lex_rev;
  auto alignments = align::align_corpus(src, tgt, options.ibm_iterations, options.jobs, &lex_fwd, &lex_rev);
  system.table = tm::build_phrase_table(src, tgt, alignments, lex_fwd, lex_rev, options.max_phrase_len, options.jobs);
  if (system.config.use_lex_reordering) {
    system.reordering = tm::estimate_lex_reordering(src, tgt, alignments, options.max_phrase_len);
  }
  system.weights = decoder::FeatureWeights::initial(system.config.use_lex_reordering);
  std::vector<double> history;
  if (!dev_src.empty() && options.tune_rounds > 0) {
    history = tune_system(system, dev_src, dev_tgt, options.tune_rounds, options.jobs);
  }
  if (report) {
    report->train_rows = src.size();
    report->phrase_pairs = system.table.size();
    report->reordering_entries = system.reordering ? system.reordering->size() : 0;
    report->tuning_bleu = history;
  }
  return system;
}

std::vector<double> tune_system(pivot::TranslationSystem& system, const std::vector<Sentence>& dev_src,
                                const std::vector<Sentence>& dev_tgt, int rounds, std::size_t jobs) {
  auto result = decoder::tune_weights(dev_src, dev_tgt, system.models(), system.config, rounds, jobs);
  system.weights = result.weights;
  return result.bleu_history;
}

corpus::CorpusSplit prepare(const corpus::ParallelCorpus& corpus, const PrepareOptions& options) {
  auto filtered = corpus::filter_corpus(corpus, options.filter);
  auto selection_lm = lm::train_kn(filtered.column(options.selection.selection_lang), options.selection_lm_order);
  return corpus::select_dev_test(filtered, selection_lm, options.selection);
}

}  // namespace pivotsmt::pipeline
