#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pivotsmt/util.hpp"

namespace pivotsmt::lm {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

// ARPA convention for the never-predicted sentence-start unigram.
inline constexpr double kImpossibleLog10 = -99.0;

using WordId = std::uint32_t;

/// Back-off n-gram model in ARPA form: every stored n-gram carries its full
/// conditional log10 probability, and every stored context may carry a log10
/// back-off weight applied when a continuation is missing.
class NGramModel {
 public:
  explicit NGramModel(int order = 1);

  int order() const { return order_; }

  // Registers a token if unseen and returns its id.
  WordId add_word(std::string_view word);
  // Id of a token, or the unknown-token id when out of vocabulary.
  WordId id(std::string_view word) const;
  bool contains(std::string_view word) const;
  const std::string& word(WordId id) const { return words_[id]; }
  const std::vector<std::string>& vocab() const { return words_; }

  WordId bos() const { return bos_; }
  WordId eos() const { return eos_; }
  WordId unk() const { return unk_; }

  void set(std::span<const WordId> ngram, double log10prob, double log10backoff = 0.0);
  bool has(std::span<const WordId> ngram) const;

  /// log10 p(word | context); context is in sentence order, most recent last,
  /// and only its last order()-1 entries are consulted.
  double cond_log10(std::span<const WordId> context, WordId word) const;

  // log10 back-off weight stored on an n-gram used as context (0 when absent).
  double backoff_log10(std::span<const WordId> context) const;

  struct Entry {
    double log10prob = 0.0;
    double log10backoff = 0.0;
  };
  using Key = std::u32string;

  // Entries of one order (1-based), unordered.
  const std::unordered_map<Key, Entry>& entries(int n) const { return tables_.at(n - 1); }

  bool operator==(const NGramModel& other) const;

 private:
  int order_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::unordered_map<Key, Entry>> tables_;
  WordId bos_, eos_, unk_;
};

/// Interpolated Kneser-Ney with one absolute discount per order. Sentences are
/// wrapped in <s> ... </s>; the unknown token takes its share of the uniform
/// mass interpolated into the unigram level.
NGramModel train_kn(const std::vector<Sentence>& corpus, int order);

// Discount actually used per order by train_kn (index 0 = unigrams).
std::vector<double> kn_discounts(const std::vector<Sentence>& corpus, int order);

/// Total log10 probability of a sentence, including the end marker.
double logprob(const NGramModel& model, const Sentence& sentence);

double perplexity(const NGramModel& model, const std::vector<Sentence>& corpus);
double perplexity(const NGramModel& model, const Sentence& sentence);

void write_arpa(const NGramModel& model, std::ostream& out);
NGramModel read_arpa(std::istream& in);
void save_arpa(const NGramModel& model, const std::filesystem::path& path);
NGramModel load_arpa(const std::filesystem::path& path);

}  // namespace pivotsmt::lm
