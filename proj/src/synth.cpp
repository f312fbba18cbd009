#include "pivotsmt/synth.hpp"

#include <array>
#include <optional>
#include <random>
#include <set>

namespace pivotsmt::synth {
namespace {

enum Category { kDet, kAdj, kNoun, kVerb, kAdv, kPrep, kCategoryCount };
constexpr std::array<std::size_t, kCategoryCount> kCategorySizes = {4, 20, 40, 20, 8, 6};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 engine_;
};

using Lexicon = std::array<std::vector<std::string>, kCategoryCount>;

Lexicon make_lexicon(Rng& rng, const std::vector<std::string>& onsets, const std::vector<std::string>& nuclei) {
  Lexicon lex;
  std::set<std::string> used;
  for (std::size_t c = 0; c < kCategoryCount; ++c) {
    while (lex[c].size() < kCategorySizes[c]) {
      std::size_t syllables = c == kDet || c == kPrep ? 1 : 2 + rng.below(2);
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) w += onsets[rng.below(onsets.size())] + nuclei[rng.below(nuclei.size())];
      if (used.insert(w).second) lex[c].push_back(w);
    }
  }
  return lex;
}

struct NounPhrase {
  std::size_t det, noun;
  std::optional<std::size_t> adj;
  std::size_t size() const { return adj ? 3 : 2; }
};

struct Clause {
  NounPhrase subject;
  std::size_t verb;
  std::optional<NounPhrase> object;
  std::optional<std::size_t> adverb;
  std::optional<std::pair<std::size_t, NounPhrase>> pp;
  std::size_t size() const {
    return subject.size() + 1 + (object ? object->size() : 0) + (adverb ? 1 : 0) + (pp ? 1 + pp->second.size() : 0);
  }
};

NounPhrase random_np(Rng& rng) {
  NounPhrase np{rng.below(kCategorySizes[kDet]), rng.below(kCategorySizes[kNoun]), std::nullopt};
  if (rng.chance(50)) np.adj = rng.below(kCategorySizes[kAdj]);
  return np;
}

void render_np(const NounPhrase& np, const Lexicon& lex, bool adj_after, Sentence& out) {
  out.push_back(lex[kDet][np.det]);
  if (np.adj && !adj_after) out.push_back(lex[kAdj][*np.adj]);
  out.push_back(lex[kNoun][np.noun]);
  if (np.adj && adj_after) out.push_back(lex[kAdj][*np.adj]);
}

Sentence render(const Clause& c, const Lexicon& lex, bool adj_after, bool postpositions) {
  Sentence out;
  render_np(c.subject, lex, adj_after, out);
  out.push_back(lex[kVerb][c.verb]);
  if (c.object) render_np(*c.object, lex, adj_after, out);
  if (c.adverb) out.push_back(lex[kAdv][*c.adverb]);
  if (c.pp) {
    if (!postpositions) out.push_back(lex[kPrep][c.pp->first]);
    render_np(c.pp->second, lex, adj_after, out);
    if (postpositions) out.push_back(lex[kPrep][c.pp->first]);
  }
  return out;
}

}  // namespace

corpus::ParallelCorpus make_fixture(const FixtureOptions& options) {
  Rng rng(options.seed);
  const Lexicon src = make_lexicon(rng, {"b", "d", "k", "l", "m", "n", "r", "s", "t"}, {"a", "e", "i", "o", "u"});
  const Lexicon piv = make_lexicon(rng, {"f", "g", "h", "p", "v", "w", "z", "ch"}, {"a", "ai", "e", "o", "ou"});
  const Lexicon tgt = make_lexicon(rng, {"j", "q", "x", "y", "sh", "zh", "ts"}, {"a", "ei", "i", "u", "uo"});

  corpus::ParallelCorpus corpus(kFixtureLanguages);
  while (corpus.size() < options.sentences) {
    Clause c{random_np(rng), rng.below(kCategorySizes[kVerb]), std::nullopt, std::nullopt, std::nullopt};
    if (rng.chance(70)) c.object = random_np(rng);
    if (rng.chance(40)) c.adverb = rng.below(kCategorySizes[kAdv]);
    if (rng.chance(40)) c.pp = std::make_pair(rng.below(kCategorySizes[kPrep]), random_np(rng));
    if (c.size() < 4 || c.size() > 10) continue;
    corpus.add_row({render(c, src, false, false), render(c, piv, true, false), render(c, tgt, false, true)});
  }
  return corpus;
}

}  // namespace pivotsmt::synth
