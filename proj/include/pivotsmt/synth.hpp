#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pivotsmt/corpus.hpp"

namespace pivotsmt::synth {

inline const std::vector<std::string> kFixtureLanguages = {"src", "piv", "tgt"};
inline constexpr std::uint64_t kFixtureSeed = 20140415;

struct FixtureOptions {
  std::size_t sentences = 2000;
  std::uint64_t seed = kFixtureSeed;
};

/// Three-way parallel corpus from one shared grammar
///   S -> NP V [NP] [ADV] [PP],  NP -> DET [ADJ] N,  PP -> P NP
/// with a fixed word list per language. `piv` puts adjectives after nouns;
/// `tgt` uses postpositions (NP P). Sentences have 4..10 tokens.
corpus::ParallelCorpus make_fixture(const FixtureOptions& options = {});

}  // namespace pivotsmt::synth
