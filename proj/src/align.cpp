#include "pivotsmt/align.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "pivotsmt/error.hpp"

namespace pivotsmt::align {

std::uint32_t Lexicon::source_id(std::string_view w) {
  auto [it, inserted] = source_ids_.try_emplace(std::string(w), static_cast<std::uint32_t>(source_words_.size()));
  if (inserted) source_words_.emplace_back(w);
  return it->second;
}

std::uint32_t Lexicon::target_id(std::string_view w) {
  auto [it, inserted] = target_ids_.try_emplace(std::string(w), static_cast<std::uint32_t>(target_words_.size()));
  if (inserted) target_words_.emplace_back(w);
  return it->second;
}

std::int64_t Lexicon::find_source(std::string_view w) const {
  auto it = source_ids_.find(std::string(w));
  return it == source_ids_.end() ? -1 : it->second;
}

std::int64_t Lexicon::find_target(std::string_view w) const {
  auto it = target_ids_.find(std::string(w));
  return it == target_ids_.end() ? -1 : it->second;
}

double Lexicon::prob(std::string_view source, std::string_view target) const {
  auto s = find_source(source);
  auto t = find_target(target);
  if (s < 0 || t < 0) return 0.0;
  auto it = probs_.find(pack(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)));
  return it == probs_.end() ? 0.0 : it->second;
}

bool Lexicon::contains(std::string_view source, std::string_view target) const {
  auto s = find_source(source);
  auto t = find_target(target);
  return s >= 0 && t >= 0 && probs_.count(pack(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t))) > 0;
}

void Lexicon::set(std::string_view source, std::string_view target, double p) {
  probs_[pack(source_id(source), target_id(target))] = p;
}

std::unordered_map<std::string, double> Lexicon::target_totals() const {
  std::unordered_map<std::string, double> totals;
  for (const auto& [key, p] : probs_) totals[target_words_[key & 0xFFFFFFFFu]] += p;
  return totals;
}

std::vector<Lexicon::Row> Lexicon::rows() const {
  std::vector<Row> out;
  out.reserve(probs_.size());
  for (const auto& [key, p] : probs_) {
    out.push_back({source_words_[key >> 32], target_words_[key & 0xFFFFFFFFu], p});
  }
  std::sort(out.begin(), out.end(), [](const Row& a, const Row& b) {
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  return out;
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::string content;
  for (const auto& row : lexicon.rows()) {
    content += row.source + ' ' + row.target + ' ' + format_double(row.prob) + '\n';
  }
  write_file_atomic(path, content);
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  Lexicon lexicon;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (fields.size() != 3) throw DataError(path.string() + " line " + std::to_string(lineno) + ": expected `src tgt prob`");
    lexicon.set(fields[0], fields[1], parse_double(fields[2]));
  }
  return lexicon;
}

Ibm1Result train_ibm1(const std::vector<Sentence>& source, const std::vector<Sentence>& target, int iterations,
                      std::size_t jobs) {
  if (iterations < 1) throw TrainingError("IBM Model 1 needs at least one iteration");
  if (source.empty()) throw TrainingError("cannot train IBM Model 1 on an empty bitext");
  if (source.size() != target.size()) throw TrainingError("bitext sides have different sentence counts");

  // Dense ids; target id 0 is NULL.
  std::unordered_map<std::string, std::uint32_t> sid, tid;
  std::vector<std::string> swords, twords{std::string(kNull)};
  tid.emplace(std::string(kNull), 0);
  std::vector<std::vector<std::uint32_t>> src_ids(source.size()), tgt_ids(source.size());
  for (std::size_t k = 0; k < source.size(); ++k) {
    if (source[k].empty() || target[k].empty()) {
      throw TrainingError("empty sentence in bitext at line " + std::to_string(k + 1));
    }
    for (const auto& w : source[k]) {
      auto [it, ins] = sid.try_emplace(w, static_cast<std::uint32_t>(swords.size()));
      if (ins) swords.push_back(w);
      src_ids[k].push_back(it->second);
    }
    tgt_ids[k].push_back(0);
    for (const auto& w : target[k]) {
      auto [it, ins] = tid.try_emplace(w, static_cast<std::uint32_t>(twords.size()));
      if (ins) twords.push_back(w);
      tgt_ids[k].push_back(it->second);
    }
  }
  auto pack = [](std::uint32_t s, std::uint32_t t) { return (std::uint64_t{s} << 32) | t; };

  std::unordered_map<std::uint64_t, double> t_prob;
  const double uniform = 1.0 / static_cast<double>(swords.size());
  for (std::size_t k = 0; k < source.size(); ++k) {
    for (auto s : src_ids[k])
      for (auto t : tgt_ids[k]) t_prob.emplace(pack(s, t), uniform);
  }

  const std::size_t chunks = std::max<std::size_t>(1, std::min(jobs, source.size()));
  Ibm1Result result;
  for (int it = 0; it < iterations; ++it) {
    struct Partial {
      std::unordered_map<std::uint64_t, double> counts;
      double loglik = 0.0;
    };
    auto partials = parallel_map(chunks, chunks, [&](std::size_t c) {
      Partial part;
      const std::size_t begin = source.size() * c / chunks;
      const std::size_t end = source.size() * (c + 1) / chunks;
      std::vector<double> probs;
      for (std::size_t k = begin; k < end; ++k) {
        const auto& tg = tgt_ids[k];
        probs.resize(tg.size());
        for (auto s : src_ids[k]) {
          double z = 0.0;
          for (std::size_t j = 0; j < tg.size(); ++j) {
            probs[j] = t_prob.at(pack(s, tg[j]));
            z += probs[j];
          }
          part.loglik += std::log(z / static_cast<double>(tg.size()));
          for (std::size_t j = 0; j < tg.size(); ++j) part.counts[pack(s, tg[j])] += probs[j] / z;
        }
      }
      return part;
    });
    std::unordered_map<std::uint64_t, double> counts;
    std::vector<double> totals(twords.size(), 0.0);
    double loglik = 0.0;
    for (const auto& part : partials) {
      loglik += part.loglik;
      for (const auto& [key, c] : part.counts) counts[key] += c;
    }
    // Per-target totals accumulated in sorted key order for reproducibility.
    std::vector<std::pair<std::uint64_t, double>> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [key, c] : sorted) totals[key & 0xFFFFFFFFu] += c;
    for (const auto& [key, c] : sorted) t_prob[key] = c / totals[key & 0xFFFFFFFFu];
    result.log_likelihood.push_back(loglik);
  }

  std::vector<std::pair<std::uint64_t, double>> sorted(t_prob.begin(), t_prob.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [key, p] : sorted) result.lexicon.set(swords[key >> 32], twords[key & 0xFFFFFFFFu], p);
  return result;
}

void AlignmentMatrix::add(std::size_t i, std::size_t j) {
  if (i >= src_len_ || j >= tgt_len_) {
    throw AlignmentError("link " + std::to_string(i) + "-" + std::to_string(j) + " outside " +
                         std::to_string(src_len_) + "x" + std::to_string(tgt_len_) + " sentence pair");
  }
  links_.emplace(i, j);
}

AlignmentMatrix AlignmentMatrix::transposed() const {
  AlignmentMatrix out(tgt_len_, src_len_);
  for (auto [i, j] : links_) out.links_.emplace(j, i);
  return out;
}

AlignmentMatrix viterbi_align(const Sentence& source, const Sentence& target, const Lexicon& lexicon) {
  AlignmentMatrix out(source.size(), target.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    double best = 0.0;
    std::size_t best_j = target.size();
    for (std::size_t j = 0; j < target.size(); ++j) {
      double p = lexicon.prob(source[i], target[j]);
      if (p > best) {
        best = p;
        best_j = j;
      }
    }
    if (best_j == target.size()) continue;
    if (lexicon.prob(source[i], kNull) > best) continue;
    out.add(i, best_j);
  }
  return out;
}

namespace {

void check_same_shape(const AlignmentMatrix& a, const AlignmentMatrix& b) {
  if (a.src_len() != b.src_len() || a.tgt_len() != b.tgt_len()) {
    throw AlignmentError("alignment dimensions differ: " + std::to_string(a.src_len()) + "x" +
                         std::to_string(a.tgt_len()) + " vs " + std::to_string(b.src_len()) + "x" +
                         std::to_string(b.tgt_len()));
  }
}

}  // namespace

AlignmentMatrix intersect(const AlignmentMatrix& a, const AlignmentMatrix& b) {
  check_same_shape(a, b);
  AlignmentMatrix out(a.src_len(), a.tgt_len());
  for (auto [i, j] : a.links())
    if (b.contains(i, j)) out.add(i, j);
  return out;
}

AlignmentMatrix unite(const AlignmentMatrix& a, const AlignmentMatrix& b) {
  check_same_shape(a, b);
  AlignmentMatrix out = a;
  for (auto [i, j] : b.links()) out.add(i, j);
  return out;
}

AlignmentMatrix symmetrize_gdfa(const AlignmentMatrix& forward, const AlignmentMatrix& reverse) {
  check_same_shape(forward, reverse);
  const std::size_t I = forward.src_len();
  const std::size_t J = forward.tgt_len();
  AlignmentMatrix result = intersect(forward, reverse);
  const AlignmentMatrix both = unite(forward, reverse);

  std::vector<int> src_links(I, 0), tgt_links(J, 0);
  for (auto [i, j] : result.links()) ++src_links[i], ++tgt_links[j];
  auto link = [&](std::size_t i, std::size_t j) {
    result.add(i, j);
    ++src_links[i];
    ++tgt_links[j];
  };

  static constexpr int kNeighbors[8][2] = {{-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}};
  bool added = true;
  while (added) {
    added = false;
    for (std::size_t i = 0; i < I; ++i) {
      for (std::size_t j = 0; j < J; ++j) {
        if (!result.contains(i, j)) continue;
        for (const auto& d : kNeighbors) {
          auto ni = static_cast<long long>(i) + d[0];
          auto nj = static_cast<long long>(j) + d[1];
          if (ni < 0 || nj < 0 || ni >= static_cast<long long>(I) || nj >= static_cast<long long>(J)) continue;
          auto ui = static_cast<std::size_t>(ni);
          auto uj = static_cast<std::size_t>(nj);
          if ((src_links[ui] == 0 || tgt_links[uj] == 0) && both.contains(ui, uj) && !result.contains(ui, uj)) {
            link(ui, uj);
            added = true;
          }
        }
      }
    }
  }

  for (const AlignmentMatrix* direction : {&forward, &reverse}) {
    for (auto [i, j] : direction->links()) {
      if (src_links[i] == 0 && tgt_links[j] == 0) link(i, j);
    }
  }
  return result;
}

std::string format_pharaoh(const AlignmentMatrix& alignment) {
  std::string out;
  for (auto [i, j] : alignment.links()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + '-' + std::to_string(j);
  }
  return out;
}

AlignmentMatrix parse_pharaoh(std::string_view line, std::size_t src_len, std::size_t tgt_len) {
  AlignmentMatrix out(src_len, tgt_len);
  for (const auto& field : split_ws(line)) {
    auto dash = field.find('-');
    if (dash == std::string::npos) throw AlignmentError("malformed alignment link '" + field + "'");
    long long i = 0, j = 0;
    try {
      i = parse_int(std::string_view(field).substr(0, dash));
      j = parse_int(std::string_view(field).substr(dash + 1));
    } catch (const DataError&) {
      throw AlignmentError("malformed alignment link '" + field + "'");
    }
    if (i < 0 || j < 0) throw AlignmentError("negative alignment index in '" + field + "'");
    out.add(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return out;
}

std::vector<AlignmentMatrix> load_alignments(const std::filesystem::path& path, const std::vector<Sentence>& source,
                                             const std::vector<Sentence>& target) {
  auto lines = read_lines(path);
  if (lines.size() != source.size() || source.size() != target.size()) {
    throw AlignmentError(path.string() + " has " + std::to_string(lines.size()) + " lines for " +
                         std::to_string(source.size()) + " sentence pairs");
  }
  std::vector<AlignmentMatrix> out;
  out.reserve(lines.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    try {
      out.push_back(parse_pharaoh(lines[k], source[k].size(), target[k].size()));
    } catch (const AlignmentError& e) {
      throw AlignmentError(path.string() + " line " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return out;
}

void save_alignments(const std::filesystem::path& path, const std::vector<AlignmentMatrix>& alignments) {
  std::string content;
  for (const auto& a : alignments) content += format_pharaoh(a) + '\n';
  write_file_atomic(path, content);
}

std::vector<AlignmentMatrix> align_corpus(const std::vector<Sentence>& source, const std::vector<Sentence>& target,
                                          int iterations, std::size_t jobs, Lexicon* forward_lexicon,
                                          Lexicon* reverse_lexicon) {
  auto fwd = train_ibm1(source, target, iterations, jobs);
  auto rev = train_ibm1(target, source, iterations, jobs);
  auto out = parallel_map(source.size(), jobs, [&](std::size_t k) {
    auto f = viterbi_align(source[k], target[k], fwd.lexicon);
    auto r = viterbi_align(target[k], source[k], rev.lexicon).transposed();
    return symmetrize_gdfa(f, r);
  });
  if (forward_lexicon) *forward_lexicon = std::move(fwd.lexicon);
  if (reverse_lexicon) *reverse_lexicon = std::move(rev.lexicon);
  return out;
}

}  // namespace pivotsmt::align
