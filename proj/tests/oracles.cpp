#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "pivotsmt/util.hpp"

namespace oracle {

using namespace pivotsmt;

std::set<SpanBox> phrase_boxes(std::size_t src_len, std::size_t tgt_len, const align::AlignmentMatrix& a,
                               std::size_t max_len) {
  std::set<SpanBox> out;
  auto src_aligned = [&](std::size_t i) {
    for (std::size_t j = 0; j < tgt_len; ++j)
      if (a.contains(i, j)) return true;
    return false;
  };
  auto tgt_aligned = [&](std::size_t j) {
    for (std::size_t i = 0; i < src_len; ++i)
      if (a.contains(i, j)) return true;
    return false;
  };
  for (std::size_t i1 = 0; i1 < src_len; ++i1)
    for (std::size_t i2 = i1; i2 < src_len && i2 - i1 < max_len; ++i2)
      for (std::size_t j1 = 0; j1 < tgt_len; ++j1)
        for (std::size_t j2 = j1; j2 < tgt_len && j2 - j1 < max_len; ++j2) {
          bool ok = src_aligned(i1) && src_aligned(i2) && tgt_aligned(j1) && tgt_aligned(j2);
          for (std::size_t i = 0; i < src_len && ok; ++i)
            for (std::size_t j = 0; j < tgt_len && ok; ++j) {
              bool in_src = i >= i1 && i <= i2;
              bool in_tgt = j >= j1 && j <= j2;
              if (a.contains(i, j) && in_src != in_tgt) ok = false;
            }
          if (ok) out.insert({i1, i2, j1, j2});
        }
  return out;
}

align::AlignmentMatrix random_alignment(Rand& rng, std::size_t src_len, std::size_t tgt_len, double density) {
  align::AlignmentMatrix a(src_len, tgt_len);
  for (std::size_t i = 0; i < src_len; ++i)
    for (std::size_t j = 0; j < tgt_len; ++j)
      if (rng.uniform(0, 1) < density) a.add(i, j);
  return a;
}

namespace {

struct Step {
  std::size_t first, last;
  Sentence target;
  std::array<double, 6> local;
  const tm::LexReorderingEntry* reo;
};

int orientation(long long prev_first, long long prev_last, long long first, long long last) {
  if (first == prev_last + 1) return 0;
  if (prev_first >= 0 && last + 1 == prev_first) return 1;
  return 2;
}

}  // namespace

std::vector<Derivation> enumerate_translations(const Sentence& source, const decoder::Models& models,
                                               const decoder::FeatureWeights& weights,
                                               const decoder::DecoderConfig& config) {
  const std::size_t I = source.size();
  const bool lexro = config.use_lex_reordering;
  const double floor = decoder::kFloorLogScore;
  auto ln = [&](double p) { return p > 0 ? std::log(p) : floor; };

  std::vector<Step> steps;
  for (std::size_t i = 0; i < I; ++i) {
    bool single = false;
    for (std::size_t j = i; j < I && j - i < config.max_phrase_len; ++j) {
      Sentence span(source.begin() + static_cast<long>(i), source.begin() + static_cast<long>(j) + 1);
      const auto* options = models.table->find(join(span));
      if (!options) continue;
      if (i == j) single = true;
      for (const auto& o : *options) {
        Step s{i, j, o.target, {}, nullptr};
        s.local = {ln(o.scores.p_t_given_s), ln(o.scores.p_s_given_t), ln(o.scores.lex_t_given_s),
                   ln(o.scores.lex_s_given_t), -1.0, -static_cast<double>(o.target.size())};
        if (lexro) s.reo = models.reordering->find(join(span), join(o.target));
        steps.push_back(s);
      }
    }
    if (!single) steps.push_back({i, i, {source[i]}, {floor, floor, floor, floor, -1.0, -1.0}, nullptr});
  }

  std::map<std::string, Derivation> best;
  std::vector<const Step*> path;
  std::vector<bool> covered(I, false);
  auto finish = [&] {
    std::vector<double> f(decoder::feature_count(lexro), 0.0);
    Sentence target;
    long long prev_first = -1, prev_last = -1;
    for (std::size_t k = 0; k < path.size(); ++k) {
      const Step& s = *path[k];
      for (std::size_t m = 0; m < 6; ++m) f[m] += s.local[m];
      target.insert(target.end(), s.target.begin(), s.target.end());
      f[decoder::kDistortion] -= std::abs(static_cast<double>(static_cast<long long>(s.first) - prev_last - 1));
      if (lexro) {
        int o = orientation(prev_first, prev_last, static_cast<long long>(s.first), static_cast<long long>(s.last));
        f[8 + o] += s.reo ? std::log(s.reo->previous[o]) : floor;
        if (k > 0) f[11 + o] += path[k - 1]->reo ? std::log(path[k - 1]->reo->next[o]) : floor;
      }
      prev_first = static_cast<long long>(s.first);
      prev_last = static_cast<long long>(s.last);
    }
    if (lexro && !path.empty()) {
      int o = path.back()->last + 1 == I ? 0 : 2;
      f[11 + o] += path.back()->reo ? std::log(path.back()->reo->next[o]) : floor;
    }
    f[decoder::kLanguageModel] = lm::logprob(*models.lm, target) * std::log(10.0);
    double score = 0.0;
    for (std::size_t m = 0; m < f.size(); ++m) score += weights.lambda[m] * f[m];
    std::string key = join(target);
    auto it = best.find(key);
    if (it == best.end() || score > it->second.score) best[key] = {key, f, score};
  };
  std::function<void(long long, std::size_t)> dfs = [&](long long prev_last, std::size_t count) {
    if (count == I) {
      finish();
      return;
    }
    for (const Step& s : steps) {
      bool free = true;
      for (std::size_t i = s.first; i <= s.last; ++i) free = free && !covered[i];
      if (!free) continue;
      double jump = std::abs(static_cast<double>(static_cast<long long>(s.first) - prev_last - 1));
      if (config.distortion_limit && jump > static_cast<double>(*config.distortion_limit)) continue;
      for (std::size_t i = s.first; i <= s.last; ++i) covered[i] = true;
      path.push_back(&s);
      dfs(static_cast<long long>(s.last), count + s.last - s.first + 1);
      path.pop_back();
      for (std::size_t i = s.first; i <= s.last; ++i) covered[i] = false;
    }
  };
  dfs(-1, 0);

  std::vector<Derivation> out;
  for (auto& [k, d] : best) out.push_back(d);
  std::sort(out.begin(), out.end(), [](const Derivation& a, const Derivation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.target < b.target;
  });
  return out;
}

ToyInstance random_toy_instance(Rand& rng, bool lex_reordering) {
  const std::vector<std::string> sv = {"a", "b", "c", "d"};
  const std::vector<std::string> tv = {"w", "x", "y", "z"};
  ToyInstance inst;
  std::size_t len = 1 + rng.below(5);
  for (std::size_t i = 0; i < len; ++i) inst.source.push_back(sv[rng.below(sv.size())]);

  std::size_t entries = 1 + rng.below(20);
  for (std::size_t e = 0; e < entries; ++e) {
    std::size_t first = rng.below(len);
    std::size_t plen = 1 + rng.below(std::min<std::size_t>(2, len - first));
    Sentence src(inst.source.begin() + static_cast<long>(first),
                 inst.source.begin() + static_cast<long>(first + plen));
    Sentence tgt;
    std::size_t tlen = 1 + rng.below(2);
    for (std::size_t k = 0; k < tlen; ++k) tgt.push_back(tv[rng.below(tv.size())]);
    tm::PhraseScores s;
    s.p_t_given_s = rng.uniform(0.05, 1.0);
    s.p_s_given_t = rng.uniform(0.05, 1.0);
    s.lex_t_given_s = rng.uniform(0.05, 1.0);
    s.lex_s_given_t = rng.uniform(0.05, 1.0);
    s.joint_count = s.src_count = s.tgt_count = 1;
    inst.table.add(src, tgt, s);
    if (lex_reordering && rng.below(3) != 0) {
      tm::LexReorderingEntry r;
      for (auto* side : {&r.previous, &r.next}) {
        double a = rng.uniform(0.1, 1), b = rng.uniform(0.1, 1), c = rng.uniform(0.1, 1);
        *side = {a / (a + b + c), b / (a + b + c), c / (a + b + c)};
      }
      inst.reordering.add(src, tgt, r);
    }
  }

  std::vector<Sentence> lm_corpus;
  for (int k = 0; k < 8; ++k) {
    Sentence s;
    std::size_t n = 1 + rng.below(4);
    for (std::size_t i = 0; i < n; ++i) s.push_back(tv[rng.below(tv.size())]);
    lm_corpus.push_back(s);
  }
  inst.lm = lm::train_kn(lm_corpus, 1 + static_cast<int>(rng.below(3)));

  inst.weights = decoder::FeatureWeights::initial(lex_reordering);
  for (auto& w : inst.weights.lambda) w = rng.uniform(0.1, 1.5);
  inst.weights.lambda[decoder::kWordPenalty] = rng.uniform(-0.5, 0.5);

  inst.config.beam_size = 1000;
  inst.config.distortion_limit = rng.below(3);
  inst.config.use_lex_reordering = lex_reordering;
  inst.config.table_limit = 100;
  inst.config.nbest_size = 10;
  return inst;
}

tm::PhraseTable triple_loop_triangulation(const tm::PhraseTable& sp, const tm::PhraseTable& pt) {
  struct Acc {
    Sentence src, tgt;
    tm::PhraseScores s;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& [s_key, s_opts] : sp.entries())
    for (const auto& p_opt : s_opts)
      for (const auto& [p_key, t_opts] : pt.entries()) {
        if (p_key != join(p_opt.target)) continue;
        for (const auto& t_opt : t_opts) {
          auto& a = acc[{s_key, join(t_opt.target)}];
          a.src = split_ws(s_key);
          a.tgt = t_opt.target;
          a.s.p_t_given_s += p_opt.scores.p_t_given_s * t_opt.scores.p_t_given_s;
          a.s.p_s_given_t += p_opt.scores.p_s_given_t * t_opt.scores.p_s_given_t;
          a.s.lex_t_given_s += p_opt.scores.lex_t_given_s * t_opt.scores.lex_t_given_s;
          a.s.lex_s_given_t += p_opt.scores.lex_s_given_t * t_opt.scores.lex_s_given_t;
          a.s.joint_count += std::min(p_opt.scores.joint_count, t_opt.scores.joint_count);
        }
      }
  std::map<std::string, double> src_total, tgt_total;
  for (const auto& [k, a] : acc) {
    src_total[k.first] += a.s.joint_count;
    tgt_total[k.second] += a.s.joint_count;
  }
  tm::PhraseTable out;
  for (auto& [k, a] : acc) {
    a.s.src_count = src_total[k.first];
    a.s.tgt_count = tgt_total[k.second];
    out.add(a.src, a.tgt, a.s);
  }
  return out;
}

tm::PhraseTable random_table(Rand& rng, const std::vector<std::string>& src_vocab,
                             const std::vector<std::string>& tgt_vocab, std::size_t entries) {
  // Conditional columns normalized per source phrase (p_t_given_s) and per target phrase (p_s_given_t).
  std::map<std::pair<std::string, std::string>, std::array<double, 4>> raw;
  for (std::size_t e = 0; e < entries; ++e) {
    std::string s = src_vocab[rng.below(src_vocab.size())];
    if (rng.below(3) == 0) s += " " + src_vocab[rng.below(src_vocab.size())];
    std::string t = tgt_vocab[rng.below(tgt_vocab.size())];
    raw[{s, t}] = {rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)};
  }
  std::map<std::string, double> by_src, by_tgt;
  for (const auto& [k, v] : raw) {
    by_src[k.first] += v[0];
    by_tgt[k.second] += v[1];
  }
  tm::PhraseTable table;
  for (const auto& [k, v] : raw) {
    tm::PhraseScores s;
    s.p_t_given_s = v[0] / by_src[k.first];
    s.p_s_given_t = v[1] / by_tgt[k.second];
    s.lex_t_given_s = v[2];
    s.lex_s_given_t = v[3];
    s.joint_count = static_cast<double>(1 + rng.below(5));
    s.src_count = s.tgt_count = 10;
    table.add(split_ws(k.first), split_ws(k.second), s);
  }
  return table;
}

namespace {

bool contiguous_image(const std::vector<std::size_t>& pi, std::size_t l, std::size_t r) {
  auto [lo, hi] = std::minmax_element(pi.begin() + static_cast<long>(l), pi.begin() + static_cast<long>(r) + 1);
  return *hi - *lo == r - l;
}

double decompose(const std::vector<std::size_t>& pi, std::size_t l, std::size_t r) {
  if (l >= r) return 0.0;
  for (std::size_t k = l; k < r; ++k) {
    if (contiguous_image(pi, l, k) && contiguous_image(pi, k + 1, r)) {
      double inverted = pi[l] > pi[r] ? static_cast<double>(r - l + 1) : 0.0;
      return inverted + decompose(pi, l, k) + decompose(pi, k + 1, r);
    }
  }
  double total = 0.0;
  for (std::size_t i = l; i <= r;) {
    std::size_t end = i;
    for (std::size_t e = r; e > i; --e) {
      if (e - i < r - l && contiguous_image(pi, i, e)) {
        end = e;
        break;
      }
    }
    total += decompose(pi, i, end);
    i = end + 1;
  }
  return total;
}

}  // namespace

double permutation_rquantity(const std::vector<std::size_t>& pi) {
  if (pi.empty()) return 0.0;
  return decompose(pi, 0, pi.size() - 1) / static_cast<double>(pi.size());
}

double sentence_bleu(const Sentence& hyp, const Sentence& ref) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::string, int> h, r;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i)
      ++h[join(Sentence(hyp.begin() + static_cast<long>(i), hyp.begin() + static_cast<long>(i + n)))];
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
      ++r[join(Sentence(ref.begin() + static_cast<long>(i), ref.begin() + static_cast<long>(i + n)))];
    double match = 0, total = hyp.size() >= n ? static_cast<double>(hyp.size() - n + 1) : 0.0;
    for (const auto& [g, c] : h) match += std::min(c, r.count(g) ? r[g] : 0);
    if (n > 1) {
      match += 1;
      total += 1;
    }
    if (match == 0 || total == 0) return 0.0;
    log_sum += std::log(match / total);
  }
  double bp = hyp.size() < ref.size() ? std::exp(1.0 - static_cast<double>(ref.size()) / hyp.size()) : 1.0;
  return bp * std::exp(log_sum / 4);
}

std::size_t mbr_brute_force(const std::vector<Sentence>& candidates, const std::vector<double>& weights) {
  std::size_t best = 0;
  double best_loss = 0;
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    double loss = 0;
    for (std::size_t b = 0; b < candidates.size(); ++b) {
      if (b == a) continue;
      double w = weights.empty() ? 1.0 : weights[b];
      loss += (1.0 - sentence_bleu(candidates[a], candidates[b])) * w;
    }
    if (a == 0 || loss < best_loss) {
      best = a;
      best_loss = loss;
    }
  }
  return best;
}

SelectionResult select_rows(const corpus::ParallelCorpus& corpus, const lm::NGramModel& model,
                            const std::string& lang, std::size_t dev_size, std::size_t test_size,
                            std::size_t pool_factor) {
  struct Row {
    std::size_t index;
    double ppl, oov;
  };
  const std::size_t k = corpus.language_index(lang);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool unique = !corpus.row(i)[k].empty();
    for (std::size_t l = 0; l < corpus.languages().size() && unique; ++l)
      for (std::size_t m = 0; m < corpus.size(); ++m)
        if (m != i && corpus.row(m)[l] == corpus.row(i)[l]) unique = false;
    if (!unique) continue;
    const Sentence& s = corpus.row(i)[k];
    double lp = 0;
    std::vector<lm::WordId> ids{model.bos()};
    for (const auto& w : s) {
      lm::WordId id = model.id(w);
      lp += model.cond_log10(ids, id);
      ids.push_back(id);
    }
    lp += model.cond_log10(ids, model.eos());
    double oov = 0;
    for (const auto& w : s) oov += model.contains(w) ? 0 : 1;
    rows.push_back({i, std::pow(10.0, -lp / static_cast<double>(s.size() + 1)), oov / static_cast<double>(s.size())});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(b.ppl, a.index) < std::tie(a.ppl, b.index);
  });
  rows.resize(std::min(rows.size(), pool_factor * (dev_size + test_size)));
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.oov != b.oov) return a.oov < b.oov;
    if (a.ppl != b.ppl) return a.ppl > b.ppl;
    return a.index < b.index;
  });
  SelectionResult out;
  for (std::size_t i = 0; i < dev_size + test_size; ++i) (i < dev_size ? out.dev : out.test).push_back(rows[i].index);
  return out;
}

}  // namespace oracle
