#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pivotsmt/corpus.hpp"
#include "pivotsmt/decoder.hpp"
#include "pivotsmt/error.hpp"
#include "pivotsmt/lm.hpp"
#include "pivotsmt/tm.hpp"

namespace pivotsmt::pivot {

/// Everything needed to decode one language pair.
struct TranslationSystem {
  tm::PhraseTable table;
  std::optional<tm::ReorderingTable> reordering;
  lm::NGramModel lm;
  decoder::FeatureWeights weights;
  decoder::DecoderConfig config;

  decoder::Models models() const { return {&table, reordering ? &*reordering : nullptr, &lm}; }

  std::vector<Sentence> translate(const std::vector<Sentence>& sources, std::size_t jobs = 1) const;
};

// Directory layout: phrase-table.txt, reordering-table.txt (optional), lm.arpa,
// weights.txt, decoder.cfg.
void save_system(const TranslationSystem& system, const std::filesystem::path& dir);
TranslationSystem load_system(const std::filesystem::path& dir);

std::string format_decoder_config(const decoder::DecoderConfig& config);
decoder::DecoderConfig parse_decoder_config(const std::vector<std::string>& lines);

// A decoding failure tagged with the pivot stage ("sp" or "pt") it came from.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const Error& cause)
      : Error(cause.category(), stage + " stage: " + cause.what()), stage_(stage) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// 1-best source->pivot output decoded again by the pivot->target system.
std::vector<Sentence> cascade_translate(const std::vector<Sentence>& sources, const TranslationSystem& sys_sp,
                                        const TranslationSystem& sys_pt, std::size_t jobs = 1);

struct PseudoCorpusReport {
  std::size_t rows = 0;
  std::vector<std::size_t> empty_rows;
};

/// Pairs each source sentence with the translation of its pivot side. The
/// result carries the languages {source_lang, target_lang}.
corpus::ParallelCorpus build_pseudo_corpus(const corpus::ParallelCorpus& bitext_sp, const std::string& source_lang,
                                   const std::string& pivot_lang, const std::string& target_lang,
                                   const TranslationSystem& sys_pt, PseudoCorpusReport* report = nullptr,
                                   std::size_t jobs = 1);

/// Marginalizes over shared pivot phrases:
///   p(t|s) = sum_p p(t|p) p(p|s),  p(s|t) = sum_p p(s|p) p(p|t),
/// lexical weights likewise. N(s,t) = sum_p min(N(s,p), N(p,t)); N(s) and
/// N(t) are the row and column sums of those pseudo-counts. With top_k, only
/// the k pivot phrases with the highest p(p|s) are joined for each source.
tm::PhraseTable triangulate(const tm::PhraseTable& table_sp, const tm::PhraseTable& table_pt,
                            std::optional<std::size_t> top_k = std::nullopt, std::size_t jobs = 1);

}  // namespace pivotsmt::pivot
