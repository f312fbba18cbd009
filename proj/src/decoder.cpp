#include "pivotsmt/decoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "pivotsmt/error.hpp"
#include "pivotsmt/eval.hpp"

namespace pivotsmt::decoder {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const std::array<std::string, kFullFeatureCount> kFeatureNames = {
    "p_t_given_s",   "p_s_given_t",    "lex_t_given_s",  "lex_s_given_t", "phrase_penalty",
    "word_penalty",  "lm",             "distortion",     "reo_prev_mono", "reo_prev_swap",
    "reo_prev_disc", "reo_next_mono", "reo_next_swap", "reo_next_disc"};

double log_or_floor(double p) { return p > 0.0 ? std::log(p) : kFloorLogScore; }

struct Option {
  std::size_t first = 0, last = 0;  // inclusive source span
  Phrase target;
  std::string target_key;
  std::vector<lm::WordId> ids;
  std::array<double, 6> local{};
  const tm::LexReorderingEntry* reordering = nullptr;
  double estimate = 0.0;
};

struct Hyp {
  std::vector<std::uint64_t> coverage;
  std::size_t covered = 0;
  long long last_first = -1;
  long long last_end = -1;
  std::vector<lm::WordId> lm_state;
  const Option* option = nullptr;
  const Hyp* parent = nullptr;
  std::vector<double> features;
  double score = 0.0;
  double future = 0.0;
  std::vector<const Hyp*> losers;

  bool covers(std::size_t i) const { return (coverage[i / 64] >> (i % 64)) & 1u; }
};

tm::Orientation previous_orientation(const Hyp& h, const Option& o) {
  if (static_cast<long long>(o.first) == h.last_end + 1) return tm::Orientation::monotone;
  if (h.option != nullptr && static_cast<long long>(o.last) + 1 == h.last_first) return tm::Orientation::swap;
  return tm::Orientation::discontinuous;
}

class Search {
 public:
  Search(const Sentence& source, const Models& models, const FeatureWeights& weights, const DecoderConfig& config)
      : source_(source), models_(models), w_(weights.lambda), config_(config) {
    if (models.table == nullptr || models.lm == nullptr) throw ConfigError("decoder needs a phrase table and an LM");
    lexro_ = config.use_lex_reordering;
    if (lexro_ && models.reordering == nullptr) {
      throw ConfigError("lexicalized reordering is enabled but no reordering table was given");
    }
    if (w_.size() != feature_count(lexro_)) {
      throw ConfigError("weight vector has " + std::to_string(w_.size()) + " entries, the active feature set has " +
                        std::to_string(feature_count(lexro_)));
    }
    for (double v : w_) {
      if (!std::isfinite(v)) throw ConfigError("feature weights must be finite");
    }
    if (config.beam_size < 1) throw ConfigError("beam_size must be >= 1");
    nfeat_ = feature_count(lexro_);
    I_ = source.size();
    collect_options();
    compute_future_costs();
  }

  // Runs the stack search; returns false when no complete hypothesis survived.
  bool run(std::optional<std::size_t> distortion_limit) {
    hyps_.clear();
    stacks_.assign(I_ + 1, {});
    index_.assign(I_ + 1, {});
    Hyp& init = hyps_.emplace_back();
    init.coverage.assign((I_ + 63) / 64 + 1, 0);
    init.lm_state = {models_.lm->bos()};
    init.features.assign(nfeat_, 0.0);
    init.future = I_ > 0 ? future_[0][I_ - 1] : 0.0;
    if (I_ == 0) {
      const lm::WordId bos[] = {models_.lm->bos()};
      init.features[kLanguageModel] = models_.lm->cond_log10(bos, models_.lm->eos()) * std::numbers::ln10;
      init.score = dot(w_, init.features);
    }
    stacks_[0].push_back(&init);

    for (std::size_t k = 0; k < I_; ++k) {
      prune(stacks_[k]);
      for (const Hyp* h : stacks_[k]) {
        for (const Option& o : options_) {
          if (o.last + 1 - o.first + k > I_) continue;
          bool free = true;
          for (std::size_t i = o.first; i <= o.last && free; ++i) free = !h->covers(i);
          if (!free) continue;
          if (distortion_limit && distortion_cost(h->last_end, static_cast<long long>(o.first)) >
                                      static_cast<double>(*distortion_limit)) {
            continue;
          }
          insert(extend(*h, o));
        }
      }
    }
    return !stacks_[I_].empty();
  }

  const std::vector<Hyp*>& final_stack() const { return stacks_[I_]; }

  // Features of a derivation replayed from the initial state.
  Hyp replay(const std::vector<const Option*>& path) const {
    Hyp h;
    h.coverage.assign((I_ + 63) / 64 + 1, 0);
    h.lm_state = {models_.lm->bos()};
    h.features.assign(nfeat_, 0.0);
    if (path.empty()) {
      const lm::WordId bos[] = {models_.lm->bos()};
      h.features[kLanguageModel] = models_.lm->cond_log10(bos, models_.lm->eos()) * std::numbers::ln10;
      h.score = dot(w_, h.features);
      return h;
    }
    for (const Option* o : path) h = extend(h, *o);
    return h;
  }

  static std::vector<const Option*> options_of(const Hyp* h) {
    std::vector<const Option*> path;
    for (; h != nullptr && h->option != nullptr; h = h->parent) path.push_back(h->option);
    std::reverse(path.begin(), path.end());
    return path;
  }

  static Sentence target_of(const std::vector<const Option*>& path) {
    Sentence out;
    for (const Option* o : path)
      for (const auto& w : o->target) out.push_back(w);
    return out;
  }

 private:
  void collect_options() {
    const auto& table = *models_.table;
    const auto& lm = *models_.lm;
    for (std::size_t i = 0; i < I_; ++i) {
      bool has_single = false;
      for (std::size_t len = 1; len <= config_.max_phrase_len && i + len <= I_; ++len) {
        Phrase span(source_.begin() + i, source_.begin() + i + len);
        const std::string key = join(span);
        const auto* entries = table.find(key);
        if (entries == nullptr) continue;
        if (len == 1) has_single = true;
        std::vector<Option> span_options;
        for (const auto& entry : *entries) {
          Option o;
          o.first = i;
          o.last = i + len - 1;
          o.target = entry.target;
          o.target_key = join(entry.target);
          const auto& s = entry.scores;
          o.local = {log_or_floor(s.p_t_given_s), log_or_floor(s.p_s_given_t), log_or_floor(s.lex_t_given_s),
                     log_or_floor(s.lex_s_given_t), -1.0, -static_cast<double>(entry.target.size())};
          if (lexro_) o.reordering = models_.reordering->find(key, o.target_key);
          finish_option(o, lm);
          span_options.push_back(std::move(o));
        }
        std::stable_sort(span_options.begin(), span_options.end(), [](const Option& a, const Option& b) {
          if (a.estimate != b.estimate) return a.estimate > b.estimate;
          return a.target_key < b.target_key;
        });
        if (span_options.size() > config_.table_limit) span_options.resize(config_.table_limit);
        for (auto& o : span_options) options_.push_back(std::move(o));
      }
      if (!has_single) {
        Option o;
        o.first = o.last = i;
        o.target = {source_[i]};
        o.target_key = source_[i];
        o.local = {kFloorLogScore, kFloorLogScore, kFloorLogScore, kFloorLogScore, -1.0, -1.0};
        finish_option(o, lm);
        options_.push_back(std::move(o));
      }
    }
  }

  void finish_option(Option& o, const lm::NGramModel& lm) const {
    double lm_estimate = 0.0;
    for (const auto& w : o.target) {
      lm::WordId id = lm.id(w);
      lm_estimate += lm.cond_log10(o.ids, id) * std::numbers::ln10;
      o.ids.push_back(id);
    }
    o.estimate = w_[kLanguageModel] * lm_estimate;
    for (std::size_t f = 0; f < o.local.size(); ++f) o.estimate += w_[f] * o.local[f];
  }

  void compute_future_costs() {
    future_.assign(I_, std::vector<double>(I_, kNegInf));
    for (const Option& o : options_) future_[o.first][o.last] = std::max(future_[o.first][o.last], o.estimate);
    for (std::size_t len = 2; len <= I_; ++len) {
      for (std::size_t i = 0; i + len <= I_; ++i) {
        std::size_t j = i + len - 1;
        for (std::size_t k = i; k < j; ++k) {
          future_[i][j] = std::max(future_[i][j], future_[i][k] + future_[k + 1][j]);
        }
      }
    }
  }

  double future_of(const Hyp& h) const {
    double total = 0.0;
    std::size_t i = 0;
    while (i < I_) {
      if (h.covers(i)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < I_ && !h.covers(j + 1)) ++j;
      total += future_[i][j];
      i = j + 1;
    }
    return total;
  }

  Hyp extend(const Hyp& h, const Option& o) const {
    Hyp n;
    n.coverage = h.coverage;
    for (std::size_t i = o.first; i <= o.last; ++i) n.coverage[i / 64] |= std::uint64_t{1} << (i % 64);
    n.covered = h.covered + (o.last - o.first + 1);
    n.last_first = static_cast<long long>(o.first);
    n.last_end = static_cast<long long>(o.last);
    n.option = &o;
    n.parent = &h;
    n.features = h.features;
    for (std::size_t f = 0; f < o.local.size(); ++f) n.features[f] += o.local[f];

    const auto& lm = *models_.lm;
    const std::size_t keep = static_cast<std::size_t>(std::max(lm.order() - 1, 1));
    std::vector<lm::WordId> ctx = h.lm_state;
    double lm_score = 0.0;
    auto push = [&](lm::WordId id) {
      lm_score += lm.cond_log10(ctx, id);
      ctx.push_back(id);
      if (ctx.size() > keep) ctx.erase(ctx.begin(), ctx.end() - static_cast<std::ptrdiff_t>(keep));
    };
    for (auto id : o.ids) push(id);
    const bool complete = n.covered == I_;
    if (complete) push(lm.eos());
    n.features[kLanguageModel] += lm_score * std::numbers::ln10;
    n.lm_state = std::move(ctx);

    n.features[kDistortion] -= distortion_cost(h.last_end, static_cast<long long>(o.first));

    if (lexro_) {
      auto orient = static_cast<std::size_t>(previous_orientation(h, o));
      n.features[kReorderPrevMonotone + orient] += o.reordering ? std::log(o.reordering->previous[orient]) : kFloorLogScore;
      if (h.option != nullptr) {
        const auto* prev = h.option->reordering;
        n.features[kReorderNextMonotone + orient] += prev ? std::log(prev->next[orient]) : kFloorLogScore;
      }
      if (complete) {
        auto end = static_cast<std::size_t>(o.last + 1 == I_ ? tm::Orientation::monotone
                                                              : tm::Orientation::discontinuous);
        n.features[kReorderNextMonotone + end] += o.reordering ? std::log(o.reordering->next[end]) : kFloorLogScore;
      }
    }
    n.score = dot(w_, n.features);
    n.future = complete ? 0.0 : future_of(n);
    return n;
  }

  std::string state_key(const Hyp& h) const {
    std::string key;
    auto put = [&](const void* p, std::size_t n) { key.append(static_cast<const char*>(p), n); };
    put(h.coverage.data(), h.coverage.size() * sizeof(std::uint64_t));
    put(&h.last_first, sizeof(h.last_first));
    put(&h.last_end, sizeof(h.last_end));
    put(h.lm_state.data(), h.lm_state.size() * sizeof(lm::WordId));
    if (lexro_) {
      const void* reo = h.option ? h.option->reordering : nullptr;
      put(&reo, sizeof(reo));
    }
    return key;
  }

  std::string partial_text(const Hyp& h) const { return join(target_of(options_of(&h))); }

  // Strict preference used for recombination and pruning ties.
  bool better(const Hyp& a, const Hyp& b) const {
    if (a.score != b.score) return a.score > b.score;
    return partial_text(a) < partial_text(b);
  }

  void insert(Hyp&& candidate) {
    const std::size_t n = candidate.covered;
    std::string key = state_key(candidate);
    Hyp& stored = hyps_.emplace_back(std::move(candidate));
    auto [it, inserted] = index_[n].try_emplace(std::move(key), &stored);
    if (inserted) {
      stacks_[n].push_back(&stored);
      return;
    }
    Hyp* previous = it->second;
    merge(it->second, &stored);
    if (it->second != previous) *std::find(stacks_[n].begin(), stacks_[n].end(), previous) = it->second;
  }

  // Recombines two equivalent hypotheses; `slot` ends up holding the winner.
  void merge(Hyp*& slot, Hyp* other) {
    if (slot == other) return;
    Hyp* winner = better(*other, *slot) ? other : slot;
    Hyp* loser = winner == other ? slot : other;
    for (const Hyp* l : loser->losers) winner->losers.push_back(l);
    loser->losers.clear();
    winner->losers.push_back(loser);
    slot = winner;
  }

  void prune(std::vector<Hyp*>& stack) {
    std::sort(stack.begin(), stack.end(), [&](const Hyp* a, const Hyp* b) {
      double ta = a->score + a->future;
      double tb = b->score + b->future;
      if (ta != tb) return ta > tb;
      std::string sa = partial_text(*a), sb = partial_text(*b);
      if (sa != sb) return sa < sb;
      return a->coverage < b->coverage;
    });
    if (stack.size() > config_.beam_size) stack.resize(config_.beam_size);
  }

  const Sentence& source_;
  const Models& models_;
  const std::vector<double>& w_;
  const DecoderConfig& config_;
  bool lexro_ = false;
  std::size_t nfeat_ = 0;
  std::size_t I_ = 0;
  std::deque<Option> options_;
  std::vector<std::vector<double>> future_;
  std::deque<Hyp> hyps_;
  std::vector<std::vector<Hyp*>> stacks_;
  std::vector<std::unordered_map<std::string, Hyp*>> index_;
};

Translation to_translation(const Search& search, const std::vector<const Option*>& path,
                           const std::vector<double>& weights) {
  Hyp h = search.replay(path);
  Translation t;
  t.target = Search::target_of(path);
  t.features = h.features;
  t.score = dot(weights, t.features);
  return t;
}

}  // namespace

std::size_t feature_count(bool lex_reordering) { return lex_reordering ? kFullFeatureCount : kBaseFeatureCount; }

std::vector<std::string> feature_names(bool lex_reordering) {
  return {kFeatureNames.begin(), kFeatureNames.begin() + static_cast<std::ptrdiff_t>(feature_count(lex_reordering))};
}

FeatureWeights FeatureWeights::initial(bool lex_reordering) {
  FeatureWeights w;
  w.lambda.assign(feature_count(lex_reordering), 1.0);
  w.lambda[kWordPenalty] = 0.0;
  return w;
}

void save_weights(const FeatureWeights& weights, bool lex_reordering, const std::filesystem::path& path) {
  auto names = feature_names(lex_reordering);
  if (names.size() != weights.lambda.size()) throw ConfigError("weight vector does not match the feature set");
  std::string content;
  for (std::size_t f = 0; f < names.size(); ++f) content += names[f] + ' ' + format_double(weights.lambda[f]) + '\n';
  write_file_atomic(path, content);
}

FeatureWeights load_weights(const std::filesystem::path& path, bool lex_reordering) {
  auto names = feature_names(lex_reordering);
  std::unordered_map<std::string, double> values;
  for (const auto& line : read_lines(path)) {
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 2) throw ConfigError(path.string() + ": expected `feature_name value` lines");
    values[fields[0]] = parse_double(fields[1]);
  }
  FeatureWeights w;
  for (const auto& name : names) {
    auto it = values.find(name);
    if (it == values.end()) throw ConfigError(path.string() + ": missing weight for feature " + name);
    w.lambda.push_back(it->second);
    values.erase(it);
  }
  if (!values.empty()) throw ConfigError(path.string() + ": unknown feature " + values.begin()->first);
  return w;
}

double distortion_cost(long long prev_end, long long next_start) {
  return static_cast<double>(std::llabs(next_start - prev_end - 1));
}

double dot(const std::vector<double>& weights, const std::vector<double>& features) {
  double s = 0.0;
  for (std::size_t f = 0; f < weights.size() && f < features.size(); ++f) s += weights[f] * features[f];
  return s;
}

NBestList nbest(const Sentence& source, const Models& models, const FeatureWeights& weights,
                const DecoderConfig& config) {
  Search search(source, models, weights, config);
  if (!search.run(config.distortion_limit)) {
    // Every hypothesis hit a dead end under the distortion limit; monotone always completes.
    search.run(std::size_t{0});
  }
  const std::size_t wanted = std::max<std::size_t>(1, config.nbest_size);

  struct Path {
    std::vector<const Hyp*> nodes;  // final hypothesis first
    std::size_t deviation = 0;
    double score = 0.0;
    std::string text;
  };
  auto chain = [](const Hyp* h, std::vector<const Hyp*>& nodes) {
    for (; h != nullptr && h->option != nullptr; h = h->parent) nodes.push_back(h);
  };
  auto text_of = [](const std::vector<const Hyp*>& nodes) {
    std::vector<const Option*> path;
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) path.push_back((*it)->option);
    return join(Search::target_of(path));
  };
  auto worse = [](const Path& a, const Path& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.text > b.text;
  };
  std::priority_queue<Path, std::vector<Path>, decltype(worse)> queue(worse);

  NBestList list;
  if (source.empty()) {
    list.push_back(to_translation(search, {}, weights.lambda));
    return list;
  }
  for (const Hyp* h : search.final_stack()) {
    Path p;
    chain(h, p.nodes);
    p.score = h->score;
    p.text = text_of(p.nodes);
    queue.push(std::move(p));
  }
  std::unordered_set<std::string> seen;
  std::size_t pops = 0;
  const std::size_t max_pops = 50 * wanted + 1000;
  while (!queue.empty() && list.size() < wanted && pops++ < max_pops) {
    Path p = queue.top();
    queue.pop();
    if (seen.insert(p.text).second) {
      std::vector<const Option*> path;
      for (auto it = p.nodes.rbegin(); it != p.nodes.rend(); ++it) path.push_back((*it)->option);
      list.push_back(to_translation(search, path, weights.lambda));
    }
    for (std::size_t i = p.deviation; i < p.nodes.size(); ++i) {
      for (const Hyp* alt : p.nodes[i]->losers) {
        Path q;
        q.nodes.assign(p.nodes.begin(), p.nodes.begin() + static_cast<std::ptrdiff_t>(i));
        chain(alt, q.nodes);
        q.deviation = i + 1;
        q.score = p.score - p.nodes[i]->score + alt->score;
        q.text = text_of(q.nodes);
        queue.push(std::move(q));
      }
    }
  }
  std::stable_sort(list.begin(), list.end(), [](const Translation& a, const Translation& b) {
    if (a.score != b.score) return a.score > b.score;
    return join(a.target) < join(b.target);
  });
  return list;
}

Translation decode(const Sentence& source, const Models& models, const FeatureWeights& weights,
                   const DecoderConfig& config) {
  DecoderConfig one = config;
  one.nbest_size = 1;
  return nbest(source, models, weights, one).front();
}

std::string format_nbest(std::size_t sentence_id, const NBestList& list, bool lex_reordering) {
  auto names = feature_names(lex_reordering);
  std::string out;
  for (const auto& t : list) {
    out += std::to_string(sentence_id) + " ||| " + join(t.target) + " |||";
    for (std::size_t f = 0; f < t.features.size() && f < names.size(); ++f) {
      out += ' ' + names[f] + ':' + format_double(t.features[f]);
    }
    out += " ||| " + format_double(t.score) + '\n';
  }
  return out;
}

std::vector<Translation> decode_corpus(const std::vector<Sentence>& sources, const Models& models,
                                       const FeatureWeights& weights, const DecoderConfig& config, std::size_t jobs) {
  return parallel_map(sources.size(), jobs,
                      [&](std::size_t i) { return decode(sources[i], models, weights, config); });
}

std::size_t merge_into_pool(CandidatePool& pool, const std::vector<NBestList>& lists) {
  if (pool.empty()) pool.resize(lists.size());
  if (pool.size() != lists.size()) throw TuningError("n-best lists do not match the pool size");
  std::size_t added = 0;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    for (const auto& t : lists[i]) {
      bool present = std::any_of(pool[i].begin(), pool[i].end(),
                                 [&](const PoolCandidate& c) { return c.target == t.target; });
      if (!present) {
        pool[i].push_back({t.target, t.features});
        ++added;
      }
    }
  }
  return added;
}

namespace {

struct PoolStats {
  std::vector<std::vector<eval::BleuStats>> stats;
};

PoolStats pool_stats(const CandidatePool& pool, const std::vector<Sentence>& refs) {
  if (pool.size() != refs.size()) throw TuningError("pool and references differ in length");
  PoolStats ps;
  ps.stats.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    for (const auto& c : pool[i]) ps.stats[i].push_back(eval::bleu_stats(c.target, refs[i]));
  }
  return ps;
}

// BLEU of the argmax under weights w where coordinate m is replaced by value.
double bleu_with(const CandidatePool& pool, const PoolStats& ps, const std::vector<std::vector<double>>& base,
                 const std::vector<double>& w, std::size_t m, double value) {
  eval::BleuStats total;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].empty()) continue;
    std::size_t best = 0;
    double best_score = kNegInf;
    for (std::size_t c = 0; c < pool[i].size(); ++c) {
      double s = base[i][c] + (value - w[m]) * pool[i][c].features[m];
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    total += ps.stats[i][best];
  }
  return eval::bleu_from_stats(total).bleu;
}

}  // namespace

double pool_bleu(const CandidatePool& pool, const std::vector<Sentence>& refs, const std::vector<double>& weights) {
  PoolStats ps = pool_stats(pool, refs);
  std::vector<std::vector<double>> base(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (const auto& c : pool[i]) base[i].push_back(dot(weights, c.features));
  return bleu_with(pool, ps, base, weights, 0, weights.empty() ? 0.0 : weights[0]);
}

SweepResult optimize_on_pool(const CandidatePool& pool, const std::vector<Sentence>& refs,
                             std::vector<double> weights, int sweeps) {
  PoolStats ps = pool_stats(pool, refs);
  std::vector<std::vector<double>> base(pool.size());
  auto rebase = [&] {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      base[i].clear();
      for (const auto& c : pool[i]) base[i].push_back(dot(weights, c.features));
    }
  };
  rebase();
  SweepResult result;
  double current = bleu_with(pool, ps, base, weights, 0, weights.empty() ? 0.0 : weights[0]);
  result.bleu_history.push_back(current);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t m = 0; m < weights.size(); ++m) {
      const double scale = weights[m] != 0.0 ? std::abs(weights[m]) : 1.0;
      double best_value = weights[m];
      double best_bleu = current;
      for (int t = 0; t <= 20; ++t) {
        const double value = (t - 5) / 5.0 * scale;
        double b = bleu_with(pool, ps, base, weights, m, value);
        if (b > best_bleu) {
          best_bleu = b;
          best_value = value;
        }
      }
      if (best_value != weights[m]) {
        weights[m] = best_value;
        current = best_bleu;
        changed = true;
        rebase();
      }
    }
    result.bleu_history.push_back(current);
    if (!changed) break;
  }
  result.weights = std::move(weights);
  return result;
}

TuningResult tune_weights(const std::vector<Sentence>& dev_src, const std::vector<Sentence>& dev_ref,
                          const Models& models, const DecoderConfig& config, int rounds, std::size_t jobs) {
  if (dev_src.empty()) throw TuningError("cannot tune on an empty dev set");
  if (dev_src.size() != dev_ref.size()) throw TuningError("dev source and reference differ in length");
  TuningResult result;
  result.weights = FeatureWeights::initial(config.use_lex_reordering);
  CandidatePool pool;
  for (int r = 0; r < rounds; ++r) {
    auto lists = parallel_map(dev_src.size(), jobs,
                              [&](std::size_t i) { return nbest(dev_src[i], models, result.weights, config); });
    std::size_t added = merge_into_pool(pool, lists);
    SweepResult sweep = optimize_on_pool(pool, dev_ref, result.weights.lambda, 3);
    result.weights.lambda = sweep.weights;
    const double bleu = sweep.bleu_history.back();
    const bool converged = !result.bleu_history.empty() && bleu - result.bleu_history.back() < 0.001;
    result.bleu_history.push_back(bleu);
    if (added == 0 || converged) break;
  }
  return result;
}

}  // namespace pivotsmt::decoder
