#include "pivotsmt/tm.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "pivotsmt/error.hpp"
#include "pivotsmt/log.hpp"

namespace pivotsmt::tm {
namespace {

constexpr std::string_view kSep = " ||| ";

void check_dims(const Sentence& src, const Sentence& tgt, const align::AlignmentMatrix& alignment) {
  if (alignment.src_len() != src.size() || alignment.tgt_len() != tgt.size()) {
    throw ExtractionError("alignment is " + std::to_string(alignment.src_len()) + "x" +
                          std::to_string(alignment.tgt_len()) + " but the sentence pair is " +
                          std::to_string(src.size()) + "x" + std::to_string(tgt.size()));
  }
}

double lexicon_prob(const align::Lexicon& lexicon, std::string_view s, std::string_view t) {
  double p = lexicon.prob(s, t);
  return p > 0.0 ? p : kLexicalFloor;
}

std::vector<std::string> split_fields(const std::string& line) {
  auto fields = split_on(line, "|||");
  for (auto& f : fields) f = std::string(trim(f));
  return fields;
}

}  // namespace

std::vector<PhrasePair> extract_phrases(const Sentence& src, const Sentence& tgt,
                                        const align::AlignmentMatrix& alignment, std::size_t max_len) {
  check_dims(src, tgt, alignment);
  const std::size_t I = src.size();
  const std::size_t J = tgt.size();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::vector<std::size_t>> src_to_tgt(I);
  std::vector<std::size_t> tgt_min_src(J, kNone), tgt_max_src(J, 0);
  std::vector<bool> tgt_aligned(J, false);
  for (auto [i, j] : alignment.links()) {
    src_to_tgt[i].push_back(j);
    tgt_min_src[j] = std::min(tgt_min_src[j], i);
    tgt_max_src[j] = std::max(tgt_max_src[j], i);
    tgt_aligned[j] = true;
  }

  std::vector<PhrasePair> out;
  for (std::size_t s1 = 0; s1 < I; ++s1) {
    if (src_to_tgt[s1].empty()) continue;
    std::size_t tmin = kNone, tmax = 0;
    for (std::size_t s2 = s1; s2 < I && s2 - s1 < max_len; ++s2) {
      for (auto j : src_to_tgt[s2]) {
        tmin = std::min(tmin, j);
        tmax = std::max(tmax, j);
      }
      if (src_to_tgt[s2].empty()) continue;
      if (tmax - tmin + 1 > max_len) continue;
      bool consistent = true;
      for (std::size_t j = tmin; j <= tmax && consistent; ++j) {
        if (tgt_aligned[j] && (tgt_min_src[j] < s1 || tgt_max_src[j] > s2)) consistent = false;
      }
      if (!consistent) continue;
      PhrasePair pair;
      pair.src.assign(src.begin() + s1, src.begin() + s2 + 1);
      pair.tgt.assign(tgt.begin() + tmin, tgt.begin() + tmax + 1);
      pair.src_first = s1;
      pair.src_last = s2;
      pair.tgt_first = tmin;
      pair.tgt_last = tmax;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

align::AlignmentMatrix phrase_links(const PhrasePair& pair, const align::AlignmentMatrix& alignment) {
  align::AlignmentMatrix local(pair.src.size(), pair.tgt.size());
  for (auto [i, j] : alignment.links()) {
    if (i >= pair.src_first && i <= pair.src_last && j >= pair.tgt_first && j <= pair.tgt_last) {
      local.add(i - pair.src_first, j - pair.tgt_first);
    }
  }
  return local;
}

double lexical_weight(const PhrasePair& pair, const align::AlignmentMatrix& links, const align::Lexicon& lexicon) {
  std::vector<double> sum(pair.src.size(), 0.0);
  std::vector<int> n(pair.src.size(), 0);
  for (auto [i, j] : links.links()) {
    sum[i] += lexicon_prob(lexicon, pair.src[i], pair.tgt[j]);
    ++n[i];
  }
  double weight = 1.0;
  for (std::size_t i = 0; i < pair.src.size(); ++i) {
    weight *= n[i] == 0 ? lexicon_prob(lexicon, pair.src[i], align::kNull) : sum[i] / n[i];
  }
  return weight;
}

void PhraseTable::add(const Phrase& src, const Phrase& tgt, const PhraseScores& scores) {
  auto& options = entries_[join(src)];
  const std::string key = join(tgt);
  auto it = std::lower_bound(options.begin(), options.end(), key,
                             [](const Option& o, const std::string& k) { return join(o.target) < k; });
  if (it != options.end() && join(it->target) == key) {
    it->scores = scores;
  } else {
    options.insert(it, Option{tgt, scores});
  }
}

const std::vector<PhraseTable::Option>* PhraseTable::find(const std::string& src_key) const {
  auto it = entries_.find(src_key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t PhraseTable::size() const {
  std::size_t n = 0;
  for (const auto& [src, options] : entries_) n += options.size();
  return n;
}

PhraseTable PhraseTable::inverted() const {
  PhraseTable out;
  for (const auto& [src, options] : entries_) {
    Phrase src_phrase = split_ws(src);
    for (const auto& o : options) {
      PhraseScores s;
      s.p_s_given_t = o.scores.p_t_given_s;
      s.lex_s_given_t = o.scores.lex_t_given_s;
      s.p_t_given_s = o.scores.p_s_given_t;
      s.lex_t_given_s = o.scores.lex_s_given_t;
      s.joint_count = o.scores.joint_count;
      s.src_count = o.scores.tgt_count;
      s.tgt_count = o.scores.src_count;
      out.add(o.target, src_phrase, s);
    }
  }
  return out;
}

void write_table(const PhraseTable& table, std::ostream& out) {
  for (const auto& [src, options] : table.entries()) {
    for (const auto& o : options) {
      const auto& s = o.scores;
      out << src << kSep << join(o.target) << kSep << format_double(s.p_s_given_t) << ' '
          << format_double(s.lex_s_given_t) << ' ' << format_double(s.p_t_given_s) << ' '
          << format_double(s.lex_t_given_s) << kSep << format_double(s.joint_count) << ' '
          << format_double(s.src_count) << ' ' << format_double(s.tgt_count) << '\n';
    }
  }
}

PhraseTable read_table(std::istream& in) {
  PhraseTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    auto fail = [&](const std::string& why) {
      return DataError("phrase table line " + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 4) throw fail("expected 4 fields separated by |||");
    auto src = split_ws(fields[0]);
    auto tgt = split_ws(fields[1]);
    auto scores = split_ws(fields[2]);
    auto counts = split_ws(fields[3]);
    if (src.empty() || tgt.empty()) throw fail("empty phrase");
    if (scores.size() != 4) throw fail("expected 4 scores");
    if (counts.size() != 3) throw fail("expected 3 counts");
    PhraseScores s;
    s.p_s_given_t = parse_double(scores[0]);
    s.lex_s_given_t = parse_double(scores[1]);
    s.p_t_given_s = parse_double(scores[2]);
    s.lex_t_given_s = parse_double(scores[3]);
    s.joint_count = parse_double(counts[0]);
    s.src_count = parse_double(counts[1]);
    s.tgt_count = parse_double(counts[2]);
    table.add(src, tgt, s);
  }
  return table;
}

void save_table(const PhraseTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  write_table(table, out);
  write_file_atomic(path, out.str());
}

PhraseTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_table(in);
}

PhraseTable build_phrase_table(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                               const std::vector<align::AlignmentMatrix>& alignments, const align::Lexicon& lex_fwd,
                               const align::Lexicon& lex_rev, std::size_t max_len, std::size_t jobs) {
  if (src.size() != tgt.size() || src.size() != alignments.size()) {
    throw ExtractionError("bitext has " + std::to_string(src.size()) + "/" + std::to_string(tgt.size()) +
                          " sentences but " + std::to_string(alignments.size()) + " alignments");
  }
  struct Occurrence {
    std::string src, tgt;
    double lex_s_given_t, lex_t_given_s;
  };
  auto per_sentence = parallel_map(src.size(), jobs, [&](std::size_t k) {
    std::vector<Occurrence> occ;
    for (const auto& pair : extract_phrases(src[k], tgt[k], alignments[k], max_len)) {
      auto links = phrase_links(pair, alignments[k]);
      PhrasePair inverse{pair.tgt, pair.src, pair.tgt_first, pair.tgt_last, pair.src_first, pair.src_last};
      occ.push_back({join(pair.src), join(pair.tgt), lexical_weight(pair, links, lex_fwd),
                     lexical_weight(inverse, links.transposed(), lex_rev)});
    }
    return occ;
  });

  struct Accum {
    double count = 0.0, lex_s_given_t = 0.0, lex_t_given_s = 0.0;
  };
  std::map<std::pair<std::string, std::string>, Accum> joint;
  std::map<std::string, double> src_count, tgt_count;
  for (const auto& occ : per_sentence) {
    for (const auto& o : occ) {
      auto& a = joint[{o.src, o.tgt}];
      a.count += 1.0;
      a.lex_s_given_t = std::max(a.lex_s_given_t, o.lex_s_given_t);
      a.lex_t_given_s = std::max(a.lex_t_given_s, o.lex_t_given_s);
      src_count[o.src] += 1.0;
      tgt_count[o.tgt] += 1.0;
    }
  }
  PhraseTable table;
  if (joint.empty()) {
    log::warn("phrase extraction produced no phrase pairs; the phrase table is empty");
    return table;
  }
  for (const auto& [key, a] : joint) {
    PhraseScores s;
    s.joint_count = a.count;
    s.src_count = src_count.at(key.first);
    s.tgt_count = tgt_count.at(key.second);
    s.p_s_given_t = a.count / s.tgt_count;
    s.p_t_given_s = a.count / s.src_count;
    s.lex_s_given_t = a.lex_s_given_t;
    s.lex_t_given_s = a.lex_t_given_s;
    table.add(split_ws(key.first), split_ws(key.second), s);
  }
  return table;
}

std::string_view orientation_name(Orientation o) {
  switch (o) {
    case Orientation::monotone: return "monotone";
    case Orientation::swap: return "swap";
    case Orientation::discontinuous: return "discontinuous";
  }
  return "discontinuous";
}

Orientation orientation_with_previous(const PhrasePair& pair, const align::AlignmentMatrix& alignment) {
  if (pair.tgt_first == 0) return pair.src_first == 0 ? Orientation::monotone : Orientation::discontinuous;
  const std::size_t t = pair.tgt_first - 1;
  if (pair.src_first > 0 && alignment.contains(pair.src_first - 1, t)) return Orientation::monotone;
  if (alignment.contains(pair.src_last + 1, t)) return Orientation::swap;
  return Orientation::discontinuous;
}

Orientation orientation_with_next(const PhrasePair& pair, const align::AlignmentMatrix& alignment) {
  const std::size_t t = pair.tgt_last + 1;
  if (t == alignment.tgt_len()) {
    return pair.src_last + 1 == alignment.src_len() ? Orientation::monotone : Orientation::discontinuous;
  }
  if (alignment.contains(pair.src_last + 1, t)) return Orientation::monotone;
  if (pair.src_first > 0 && alignment.contains(pair.src_first - 1, t)) return Orientation::swap;
  return Orientation::discontinuous;
}

void ReorderingTable::add(const Phrase& src, const Phrase& tgt, const LexReorderingEntry& entry) {
  entries_[{join(src), join(tgt)}] = entry;
}

const LexReorderingEntry* ReorderingTable::find(const std::string& src_key, const std::string& tgt_key) const {
  auto it = entries_.find({src_key, tgt_key});
  return it == entries_.end() ? nullptr : &it->second;
}

ReorderingTable estimate_lex_reordering(const std::vector<Sentence>& src, const std::vector<Sentence>& tgt,
                                        const std::vector<align::AlignmentMatrix>& alignments, std::size_t max_len,
                                        double sigma) {
  if (src.size() != tgt.size() || src.size() != alignments.size()) {
    throw ExtractionError("bitext and alignments differ in length");
  }
  std::map<std::pair<std::string, std::string>, std::array<double, 6>> counts;
  for (std::size_t k = 0; k < src.size(); ++k) {
    for (const auto& pair : extract_phrases(src[k], tgt[k], alignments[k], max_len)) {
      auto& c = counts[{join(pair.src), join(pair.tgt)}];
      c[static_cast<int>(orientation_with_previous(pair, alignments[k]))] += 1.0;
      c[3 + static_cast<int>(orientation_with_next(pair, alignments[k]))] += 1.0;
    }
  }
  ReorderingTable table;
  if (counts.empty()) log::warn("phrase extraction produced no phrase pairs; the reordering table is empty");
  for (const auto& [key, c] : counts) {
    LexReorderingEntry e;
    const double prev_total = c[0] + c[1] + c[2] + 3.0 * sigma;
    const double next_total = c[3] + c[4] + c[5] + 3.0 * sigma;
    for (int o = 0; o < 3; ++o) {
      e.previous[o] = (c[o] + sigma) / prev_total;
      e.next[o] = (c[3 + o] + sigma) / next_total;
    }
    table.add(split_ws(key.first), split_ws(key.second), e);
  }
  return table;
}

void write_reordering(const ReorderingTable& table, std::ostream& out) {
  for (const auto& [key, e] : table.entries()) {
    out << key.first << kSep << key.second << kSep;
    for (int o = 0; o < 3; ++o) out << format_double(e.previous[o]) << ' ';
    for (int o = 0; o < 3; ++o) out << format_double(e.next[o]) << (o < 2 ? " " : "");
    out << '\n';
  }
}

ReorderingTable read_reordering(std::istream& in) {
  ReorderingTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw DataError("reordering table line " + std::to_string(lineno) + ": expected 3 fields separated by |||");
    }
    auto probs = split_ws(fields[2]);
    if (probs.size() != 6) throw DataError("reordering table line " + std::to_string(lineno) + ": expected 6 probabilities");
    LexReorderingEntry e;
    for (int o = 0; o < 3; ++o) {
      e.previous[o] = parse_double(probs[o]);
      e.next[o] = parse_double(probs[3 + o]);
    }
    table.add(split_ws(fields[0]), split_ws(fields[1]), e);
  }
  return table;
}

void save_reordering(const ReorderingTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  write_reordering(table, out);
  write_file_atomic(path, out.str());
}

ReorderingTable load_reordering(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_reordering(in);
}

}  // namespace pivotsmt::tm
