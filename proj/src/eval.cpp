#include "pivotsmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "pivotsmt/error.hpp"

namespace pivotsmt::eval {
namespace {

using NgramCounts = std::map<std::vector<std::string_view>, int>;

NgramCounts ngram_counts(const Sentence& s, int n) {
  NgramCounts counts;
  if (s.size() < static_cast<std::size_t>(n)) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    std::vector<std::string_view> gram(s.begin() + i, s.begin() + i + n);
    ++counts[gram];
  }
  return counts;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < kBleuOrder; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
  return *this;
}

BleuStats bleu_stats(const Sentence& hyp, const Sentence& ref) {
  BleuStats st;
  st.hyp_len = static_cast<double>(hyp.size());
  st.ref_len = static_cast<double>(ref.size());
  for (int n = 1; n <= kBleuOrder; ++n) {
    auto h = ngram_counts(hyp, n);
    auto r = ngram_counts(ref, n);
    double matched = 0.0;
    for (const auto& [gram, c] : h) {
      auto it = r.find(gram);
      if (it != r.end()) matched += std::min(c, it->second);
    }
    st.matches[n - 1] = matched;
    st.totals[n - 1] = hyp.size() >= static_cast<std::size_t>(n) ? static_cast<double>(hyp.size() - n + 1) : 0.0;
  }
  return st;
}

BleuReport bleu_from_stats(const BleuStats& stats) {
  BleuReport report;
  report.hyp_len = stats.hyp_len;
  report.ref_len = stats.ref_len;
  double log_sum = 0.0;
  bool zero = false;
  for (int n = 0; n < kBleuOrder; ++n) {
    double p = stats.totals[n] > 0.0 ? stats.matches[n] / stats.totals[n] : 0.0;
    report.precisions[n] = p;
    if (p <= 0.0) zero = true;
    else log_sum += std::log(p);
  }
  if (stats.hyp_len <= 0.0) {
    report.brevity_penalty = 0.0;
  } else if (stats.hyp_len < stats.ref_len) {
    report.brevity_penalty = std::exp(1.0 - stats.ref_len / stats.hyp_len);
  } else {
    report.brevity_penalty = 1.0;
  }
  report.bleu = zero ? 0.0 : std::exp(log_sum / kBleuOrder) * report.brevity_penalty;
  return report;
}

std::string summary_line(const BleuReport& r) {
  double ratio = r.ref_len > 0.0 ? r.hyp_len / r.ref_len : 0.0;
  return "BLEU=" + fixed(r.bleu) + ' ' + fixed(r.precisions[0]) + '/' + fixed(r.precisions[1]) + '/' +
         fixed(r.precisions[2]) + '/' + fixed(r.precisions[3]) + " BP=" + fixed(r.brevity_penalty) +
         " ratio=" + fixed(ratio);
}

std::string format_report(const BleuReport& r) {
  std::string out;
  out += "bleu: " + fixed(r.bleu) + '\n';
  for (int n = 0; n < kBleuOrder; ++n) out += "precision_" + std::to_string(n + 1) + ": " + fixed(r.precisions[n]) + '\n';
  out += "brevity_penalty: " + fixed(r.brevity_penalty) + '\n';
  out += "hyp_len: " + fixed(r.hyp_len, 0) + '\n';
  out += "ref_len: " + fixed(r.ref_len, 0) + '\n';
  out += summary_line(r) + '\n';
  return out;
}

BleuReport bleu_corpus(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
  if (hyps.size() != refs.size()) {
    throw EvaluationError("hypothesis count " + std::to_string(hyps.size()) + " differs from reference count " +
                          std::to_string(refs.size()));
  }
  if (hyps.empty()) throw EvaluationError("cannot score an empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += bleu_stats(hyps[i], refs[i]);
  return bleu_from_stats(total);
}

double bleu_sentence(const Sentence& hyp, const Sentence& ref) {
  if (hyp.empty()) return 0.0;
  BleuStats st = bleu_stats(hyp, ref);
  double log_sum = 0.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    double m = st.matches[n];
    double t = st.totals[n];
    if (n > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m <= 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  double bp = st.hyp_len < st.ref_len ? std::exp(1.0 - st.ref_len / st.hyp_len) : 1.0;
  return std::exp(log_sum / kBleuOrder) * bp;
}

std::size_t mbr_select(const std::vector<Sentence>& candidates, const std::vector<double>& posterior) {
  if (candidates.size() < 3) {
    throw CombinationError("MBR combination needs at least 3 hypotheses per sentence, got " +
                           std::to_string(candidates.size()) +
                           " (with two, the 1-BLEU loss always prefers the longer one)");
  }
  if (!posterior.empty()) {
    if (posterior.size() != candidates.size()) throw CombinationError("posterior length differs from candidate count");
    for (double w : posterior) {
      if (!(w >= 0.0)) throw CombinationError("posterior weights must be non-negative");
    }
  }
  std::size_t best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double loss = 0.0;
    for (std::size_t t = 0; t < candidates.size(); ++t) {
      if (t == c) continue;
      double w = posterior.empty() ? 1.0 : posterior[t];
      loss += (1.0 - bleu_sentence(candidates[c], candidates[t])) * w;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = c;
    }
  }
  return best;
}

std::vector<Sentence> mbr_combine(const std::vector<std::vector<Sentence>>& lists) {
  if (lists.size() < 3) {
    throw CombinationError("MBR combination needs at least 3 hypotheses per sentence, got " +
                           std::to_string(lists.size()) + " systems");
  }
  for (const auto& l : lists) {
    if (l.size() != lists[0].size()) throw CombinationError("system outputs have different sentence counts");
  }
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < lists[0].size(); ++i) {
    std::vector<Sentence> candidates;
    for (const auto& l : lists) candidates.push_back(l[i]);
    out.push_back(candidates[mbr_select(candidates)]);
  }
  return out;
}

std::string format_verdict(const SignificanceVerdict& v, double level) {
  std::string winner = v.confident_winner == Winner::a ? "A" : v.confident_winner == Winner::b ? "B" : "none";
  return "wins_a=" + std::to_string(v.wins_a) + " wins_b=" + std::to_string(v.wins_b) +
         " ties=" + std::to_string(v.ties) + " level=" + fixed(level, 4) + " winner=" + winner;
}

SignificanceVerdict bootstrap_significance(const std::vector<Sentence>& hyps_a, const std::vector<Sentence>& hyps_b,
                                           const std::vector<Sentence>& refs, std::size_t samples, double level,
                                           std::uint64_t seed, std::size_t jobs) {
  if (hyps_a.size() != refs.size() || hyps_b.size() != refs.size()) {
    throw EvaluationError("system outputs and references differ in length");
  }
  if (refs.empty()) throw EvaluationError("cannot resample an empty test set");
  if (samples < 1) throw EvaluationError("bootstrap needs at least one sample");
  const std::size_t n = refs.size();
  std::vector<BleuStats> stats_a(n), stats_b(n);
  for (std::size_t i = 0; i < n; ++i) {
    stats_a[i] = bleu_stats(hyps_a[i], refs[i]);
    stats_b[i] = bleu_stats(hyps_b[i], refs[i]);
  }
  auto outcomes = parallel_map(samples, jobs, [&](std::size_t r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xFFFFFFFFu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r & 0xFFFFFFFFu), static_cast<std::uint32_t>(r >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    BleuStats a, b;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t i = pick(rng);
      a += stats_a[i];
      b += stats_b[i];
    }
    double ba = bleu_from_stats(a).bleu;
    double bb = bleu_from_stats(b).bleu;
    return ba > bb ? 1 : (bb > ba ? -1 : 0);
  });
  SignificanceVerdict v;
  for (int o : outcomes) {
    if (o > 0) ++v.wins_a;
    else if (o < 0) ++v.wins_b;
    else ++v.ties;
  }
  const double total = static_cast<double>(samples);
  if (static_cast<double>(v.wins_a) / total >= level) v.confident_winner = Winner::a;
  else if (static_cast<double>(v.wins_b) / total >= level) v.confident_winner = Winner::b;
  return v;
}

double ReorderingSet::score() const {
  if (source_length == 0) return 0.0;
  double mass = 0.0;
  for (const auto& r : reorderings) mass += static_cast<double>(r.a.size() + r.b.size());
  return mass / static_cast<double>(source_length);
}

ReorderingSet extract_reorderings(const align::AlignmentMatrix& alignment) {
  ReorderingSet result;
  const std::size_t I = alignment.src_len();
  const std::size_t J = alignment.tgt_len();
  result.source_length = I;
  if (I == 0 || alignment.empty()) return result;

  // Effective links: unaligned source words borrow a neighbour's targets.
  std::vector<std::vector<std::size_t>> links(I);
  for (auto [i, j] : alignment.links()) links[i].push_back(j);
  std::size_t first_aligned = 0;
  while (links[first_aligned].empty()) ++first_aligned;
  for (std::size_t i = 0; i < first_aligned; ++i) links[i] = links[first_aligned];
  for (std::size_t i = first_aligned + 1; i < I; ++i) {
    if (links[i].empty()) links[i] = links[i - 1];
  }

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> src_min(J, kNone), src_max(J, 0);
  for (std::size_t i = 0; i < I; ++i) {
    for (auto j : links[i]) {
      src_min[j] = std::min(src_min[j], i);
      src_max[j] = std::max(src_max[j], i);
    }
  }
  struct Block {
    bool consistent;
    std::size_t tmin, tmax;
  };
  auto block = [&](std::size_t l, std::size_t r) {
    std::size_t tmin = kNone, tmax = 0;
    for (std::size_t i = l; i <= r; ++i) {
      for (auto j : links[i]) {
        tmin = std::min(tmin, j);
        tmax = std::max(tmax, j);
      }
    }
    for (std::size_t j = tmin; j <= tmax; ++j) {
      if (src_min[j] != kNone && (src_min[j] < l || src_max[j] > r)) return Block{false, tmin, tmax};
    }
    return Block{true, tmin, tmax};
  };

  std::function<void(std::size_t, std::size_t)> decompose = [&](std::size_t l, std::size_t r) {
    if (l >= r) return;
    for (std::size_t k = l; k < r; ++k) {
      Block left = block(l, k);
      if (!left.consistent) continue;
      Block right = block(k + 1, r);
      if (!right.consistent) continue;
      if (left.tmin > right.tmax) result.reorderings.push_back({{l, k}, {k + 1, r}});
      decompose(l, k);
      decompose(k + 1, r);
      return;
    }
    // No binary split: descend into the longest proper consistent blocks.
    std::size_t i = l;
    while (i <= r) {
      std::size_t end = i;
      for (std::size_t e = r; e > i; --e) {
        if (e - i < r - l && block(i, e).consistent) {
          end = e;
          break;
        }
      }
      decompose(i, end);
      i = end + 1;
    }
  };
  decompose(0, I - 1);
  return result;
}

RQuantityResult rquantity(const std::vector<align::AlignmentMatrix>& alignments) {
  RQuantityResult result;
  double sum = 0.0;
  for (const auto& a : alignments) {
    result.sentences.push_back(extract_reorderings(a));
    sum += result.sentences.back().score();
  }
  result.average = alignments.empty() ? 0.0 : sum / static_cast<double>(alignments.size());
  return result;
}

}  // namespace pivotsmt::eval
