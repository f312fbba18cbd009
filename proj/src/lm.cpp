#include "pivotsmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "pivotsmt/error.hpp"
#include "pivotsmt/log.hpp"

namespace pivotsmt::lm {
namespace {

using Key = NGramModel::Key;

Key make_key(std::span<const WordId> ids) {
  return Key(ids.begin(), ids.end());
}

// Token ids of <s> w1 .. wk </s>.
std::vector<WordId> padded_ids(const NGramModel& model, const Sentence& sentence) {
  std::vector<WordId> ids;
  ids.reserve(sentence.size() + 2);
  ids.push_back(model.bos());
  for (const auto& w : sentence) ids.push_back(model.id(w));
  ids.push_back(model.eos());
  return ids;
}

struct KnCounts {
  std::vector<std::unordered_map<Key, double>> by_order;  // index n-1
};

// Raw counts at the highest order; continuation counts below it, except for
// n-grams that start with <s>, which have no left context and keep raw counts.
KnCounts collect_counts(const NGramModel& model, const std::vector<Sentence>& corpus, int order) {
  std::vector<std::unordered_map<Key, double>> raw(order);
  for (const auto& sentence : corpus) {
    auto ids = padded_ids(model, sentence);
    for (std::size_t end = 1; end < ids.size(); ++end) {
      for (int n = 1; n <= order && static_cast<std::size_t>(n) <= end + 1; ++n) {
        std::span<const WordId> gram(ids.data() + end + 1 - n, n);
        raw[n - 1][make_key(gram)] += 1.0;
      }
    }
  }
  KnCounts counts;
  counts.by_order.resize(order);
  counts.by_order[order - 1] = raw[order - 1];
  for (int n = order - 1; n >= 1; --n) {
    auto& kn = counts.by_order[n - 1];
    for (const auto& [gram, c] : raw[n - 1]) {
      if (gram.front() == model.bos()) kn[gram] = c;
    }
    for (const auto& [longer, c] : raw[n]) {
      if (longer.size() < 2) continue;
      kn[longer.substr(1)] += 1.0;
    }
  }
  return counts;
}

std::vector<double> discounts_from(const KnCounts& counts, bool warn) {
  std::vector<double> d;
  for (std::size_t i = 0; i < counts.by_order.size(); ++i) {
    double n1 = 0, n2 = 0;
    for (const auto& [gram, c] : counts.by_order[i]) {
      if (c == 1.0) ++n1;
      else if (c == 2.0) ++n2;
    }
    if (n1 == 0 || n2 == 0) {
      if (warn) {
        log::warn("order " + std::to_string(i + 1) +
                  ": count-of-counts too sparse for a discount estimate, using D=0.5");
      }
      d.push_back(0.5);
    } else {
      d.push_back(n1 / (n1 + 2.0 * n2));
    }
  }
  return d;
}

NGramModel vocab_model(const std::vector<Sentence>& corpus, int order) {
  if (order < 1) throw TrainingError("language model order must be >= 1");
  if (corpus.empty()) throw TrainingError("cannot train a language model on an empty corpus");
  NGramModel model(order);
  for (const auto& s : corpus)
    for (const auto& w : s) model.add_word(w);
  return model;
}

}  // namespace

NGramModel::NGramModel(int order) : order_(order), tables_(std::max(order, 1)) {
  if (order < 1) throw ConfigError("language model order must be >= 1");
  unk_ = add_word(kUnk);
  bos_ = add_word(kBos);
  eos_ = add_word(kEos);
}

WordId NGramModel::add_word(std::string_view word) {
  auto it = ids_.find(std::string(word));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  ids_.emplace(std::string(word), id);
  return id;
}

WordId NGramModel::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? unk_ : it->second;
}

bool NGramModel::contains(std::string_view word) const {
  return ids_.count(std::string(word)) > 0;
}

void NGramModel::set(std::span<const WordId> ngram, double log10prob, double log10backoff) {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) {
    throw DataError("n-gram length outside model order");
  }
  tables_[ngram.size() - 1][make_key(ngram)] = Entry{log10prob, log10backoff};
}

bool NGramModel::has(std::span<const WordId> ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return false;
  return tables_[ngram.size() - 1].count(make_key(ngram)) > 0;
}

double NGramModel::backoff_log10(std::span<const WordId> context) const {
  if (context.empty() || static_cast<int>(context.size()) >= order_) return 0.0;
  const auto& table = tables_[context.size() - 1];
  auto it = table.find(make_key(context));
  return it == table.end() ? 0.0 : it->second.log10backoff;
}

double NGramModel::cond_log10(std::span<const WordId> context, WordId word) const {
  std::size_t max_ctx = std::min<std::size_t>(context.size(), order_ - 1);
  Key key;
  key.reserve(max_ctx + 1);
  double backoff = 0.0;
  for (std::size_t ctx_len = max_ctx + 1; ctx_len-- > 0;) {
    auto ctx = context.subspan(context.size() - ctx_len, ctx_len);
    key.assign(ctx.begin(), ctx.end());
    key.push_back(word);
    const auto& table = tables_[ctx_len];
    auto it = table.find(key);
    if (it != table.end()) return backoff + it->second.log10prob;
    backoff += backoff_log10(ctx);
  }
  // Only reachable for a model without a unigram entry for this word.
  if (word != unk_) return cond_log10(context, unk_);
  return kImpossibleLog10;
}

bool NGramModel::operator==(const NGramModel& other) const {
  if (order_ != other.order_ || words_.size() != other.words_.size()) return false;
  for (int n = 0; n < order_; ++n) {
    const auto& mine = tables_[n];
    const auto& theirs = other.tables_[n];
    if (mine.size() != theirs.size()) return false;
    for (const auto& [key, entry] : mine) {
      Key mapped;
      for (auto id : key) {
        if (!other.contains(words_[id])) return false;
        mapped.push_back(other.id(words_[id]));
      }
      auto it = theirs.find(mapped);
      if (it == theirs.end() || it->second.log10prob != entry.log10prob ||
          it->second.log10backoff != entry.log10backoff) {
        return false;
      }
    }
  }
  return true;
}

std::vector<double> kn_discounts(const std::vector<Sentence>& corpus, int order) {
  NGramModel model = vocab_model(corpus, order);
  return discounts_from(collect_counts(model, corpus, order), false);
}

NGramModel train_kn(const std::vector<Sentence>& corpus, int order) {
  NGramModel model = vocab_model(corpus, order);
  KnCounts counts = collect_counts(model, corpus, order);
  std::vector<double> discount = discounts_from(counts, true);

  // Unigrams: discounted continuation counts plus uniform leftover mass over
  // every predictable token (all of the vocabulary except <s>).
  {
    const auto& uni = counts.by_order[0];
    double total = 0;
    for (const auto& [gram, c] : uni) total += c;
    const double d = discount[0];
    const double predictable = static_cast<double>(model.vocab().size() - 1);
    const double uniform = d * static_cast<double>(uni.size()) / total / predictable;
    for (WordId w = 0; w < model.vocab().size(); ++w) {
      if (w == model.bos()) continue;
      Key key(1, w);
      auto it = uni.find(key);
      double c = it == uni.end() ? 0.0 : it->second;
      double p = std::max(c - d, 0.0) / total + uniform;
      const WordId gram[] = {w};
      model.set(gram, std::log10(p));
    }
    const WordId bos[] = {model.bos()};
    model.set(bos, kImpossibleLog10);
  }

  for (int n = 2; n <= order; ++n) {
    const auto& grams = counts.by_order[n - 1];
    const double d = discount[n - 1];
    std::unordered_map<Key, std::pair<double, double>> context_stats;  // total, types
    for (const auto& [gram, c] : grams) {
      auto& st = context_stats[gram.substr(0, n - 1)];
      st.first += c;
      st.second += 1.0;
    }
    // Back-off weights live on the context entries one order down.
    for (const auto& [ctx, st] : context_stats) {
      std::vector<WordId> ids(ctx.begin(), ctx.end());
      const auto& lower = model.entries(n - 1);
      auto it = lower.find(ctx);
      double lp = it == lower.end() ? model.cond_log10(std::span<const WordId>(ids).first(n - 2), ids.back())
                                    : it->second.log10prob;
      model.set(ids, lp, std::log10(d * st.second / st.first));
    }
    for (const auto& [gram, c] : grams) {
      const auto& st = context_stats.at(gram.substr(0, n - 1));
      const double gamma = d * st.second / st.first;
      std::vector<WordId> ids(gram.begin(), gram.end());
      std::span<const WordId> shorter_ctx(ids.data() + 1, n - 2);
      double lower = std::pow(10.0, model.cond_log10(shorter_ctx, ids.back()));
      double p = std::max(c - d, 0.0) / st.first + gamma * lower;
      model.set(ids, std::log10(p));
    }
  }
  return model;
}

double logprob(const NGramModel& model, const Sentence& sentence) {
  auto ids = padded_ids(model, sentence);
  double total = 0.0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    total += model.cond_log10(std::span<const WordId>(ids.data(), i), ids[i]);
  }
  return total;
}

double perplexity(const NGramModel& model, const std::vector<Sentence>& corpus) {
  double total = 0.0;
  double predicted = 0.0;
  for (const auto& s : corpus) {
    total += logprob(model, s);
    predicted += static_cast<double>(s.size() + 1);
  }
  if (predicted == 0.0) return 1.0;
  return std::pow(10.0, -total / predicted);
}

double perplexity(const NGramModel& model, const Sentence& sentence) {
  return perplexity(model, std::vector<Sentence>{sentence});
}

void write_arpa(const NGramModel& model, std::ostream& out) {
  out << "\n\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) {
    out << "ngram " << n << '=' << model.entries(n).size() << '\n';
  }
  for (int n = 1; n <= model.order(); ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::map<std::string, const NGramModel::Entry*> sorted;
    for (const auto& [key, entry] : model.entries(n)) {
      std::string text;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i > 0) text += ' ';
        text += model.word(key[i]);
      }
      sorted.emplace(std::move(text), &entry);
    }
    for (const auto& [text, entry] : sorted) {
      out << format_double(entry->log10prob) << '\t' << text;
      if (n < model.order() && entry->log10backoff != 0.0) {
        out << '\t' << format_double(entry->log10backoff);
      }
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NGramModel read_arpa(std::istream& in) {
  std::string line;
  std::vector<std::size_t> declared;
  while (std::getline(in, line)) {
    if (trim(line) == "\\data\\") break;
  }
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) {
      if (!declared.empty()) break;
      continue;
    }
    if (t.rfind("ngram ", 0) != 0) throw DataError("malformed ARPA header line: " + line);
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw DataError("malformed ARPA header line: " + line);
    auto n = parse_int(t.substr(6, eq - 6));
    if (n != static_cast<long long>(declared.size()) + 1) throw DataError("ARPA orders out of sequence");
    declared.push_back(static_cast<std::size_t>(parse_int(t.substr(eq + 1))));
  }
  if (declared.empty()) throw DataError("ARPA file has no \\data\\ section");
  NGramModel model(static_cast<int>(declared.size()));
  int current = 0;
  std::vector<std::size_t> seen(declared.size(), 0);
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    if (t == "\\end\\") break;
    if (t.front() == '\\') {
      auto dash = t.find("-grams:");
      if (dash == std::string_view::npos) throw DataError("malformed ARPA section: " + line);
      current = static_cast<int>(parse_int(t.substr(1, dash - 1)));
      if (current < 1 || current > model.order()) throw DataError("ARPA section order out of range");
      continue;
    }
    if (current == 0) throw DataError("ARPA entry outside any section");
    auto fields = split_ws(t);
    if (fields.size() != static_cast<std::size_t>(current) + 1 &&
        fields.size() != static_cast<std::size_t>(current) + 2) {
      throw DataError("malformed ARPA entry: " + line);
    }
    double lp = parse_double(fields[0]);
    std::vector<WordId> ids;
    for (int i = 0; i < current; ++i) ids.push_back(model.add_word(fields[1 + i]));
    double bo = fields.size() == static_cast<std::size_t>(current) + 2 ? parse_double(fields.back()) : 0.0;
    model.set(ids, lp, bo);
    ++seen[current - 1];
  }
  for (std::size_t i = 0; i < declared.size(); ++i) {
    if (seen[i] != declared[i]) {
      throw DataError("ARPA order " + std::to_string(i + 1) + " declares " + std::to_string(declared[i]) +
                      " entries but has " + std::to_string(seen[i]));
    }
  }
  return model;
}

void save_arpa(const NGramModel& model, const std::filesystem::path& path) {
  std::ostringstream out;
  write_arpa(model, out);
  write_file_atomic(path, out.str());
}

NGramModel load_arpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_arpa(in);
}

}  // namespace pivotsmt::lm
