#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "oracles.hpp"
#include "pivotsmt/error.hpp"
#include "pivotsmt/log.hpp"
#include "pivotsmt/pivot.hpp"

using namespace pivotsmt;
using pivot::TranslationSystem;

namespace {

tm::PhraseScores scores(double pts, double pst, double lts, double lst, double n = 1) {
  tm::PhraseScores s;
  s.p_t_given_s = pts;
  s.p_s_given_t = pst;
  s.lex_t_given_s = lts;
  s.lex_s_given_t = lst;
  s.joint_count = s.src_count = s.tgt_count = n;
  return s;
}

TranslationSystem identity_system(const std::vector<std::string>& vocab) {
  TranslationSystem sys;
  std::vector<Sentence> lm_corpus;
  for (const auto& w : vocab) {
    sys.table.add({w}, {w}, scores(1, 1, 1, 1));
    lm_corpus.push_back({w});
  }
  sys.lm = lm::train_kn(lm_corpus, 1);
  sys.config.use_lex_reordering = false;
  sys.weights = decoder::FeatureWeights::initial(false);
  return sys;
}

TranslationSystem toy_system(const oracle::ToyInstance& inst) {
  TranslationSystem sys;
  sys.table = inst.table;
  sys.reordering = inst.reordering;
  sys.lm = inst.lm;
  sys.weights = inst.weights;
  sys.config = inst.config;
  return sys;
}

void check_close(const tm::PhraseTable& got, const tm::PhraseTable& want) {
  REQUIRE(got.size() == want.size());
  for (const auto& [src, opts] : want.entries()) {
    const auto* g = got.find(src);
    REQUIRE(g);
    REQUIRE(g->size() == opts.size());
    for (std::size_t k = 0; k < opts.size(); ++k) {
      CHECK((*g)[k].target == opts[k].target);
      const auto &a = (*g)[k].scores, &b = opts[k].scores;
      CHECK(std::abs(a.p_t_given_s - b.p_t_given_s) < 1e-9);
      CHECK(std::abs(a.p_s_given_t - b.p_s_given_t) < 1e-9);
      CHECK(std::abs(a.lex_t_given_s - b.lex_t_given_s) < 1e-9);
      CHECK(std::abs(a.lex_s_given_t - b.lex_s_given_t) < 1e-9);
      CHECK(a.joint_count == b.joint_count);
      CHECK(a.src_count == b.src_count);
      CHECK(a.tgt_count == b.tgt_count);
    }
  }
}

const std::vector<std::string> kSrc = {"a", "b", "c", "d"}, kPiv = {"p", "q", "r", "s"}, kTgt = {"w", "x", "y", "z"};

}  // namespace

TEST_SUITE("pivot") {
  TEST_CASE("an identity pivot table reproduces the source-pivot table") {
    oracle::Rand rng(12);
    for (int trial = 0; trial < 20; ++trial) {
      auto sp = oracle::random_table(rng, kSrc, kPiv, 10);
      tm::PhraseTable identity;
      for (const auto& [s, opts] : sp.entries())
        for (const auto& o : opts) identity.add(o.target, o.target, scores(1, 1, 1, 1, 1e9));
      auto out = pivot::triangulate(sp, identity);
      REQUIRE(out.size() == sp.size());
      for (const auto& [s, opts] : sp.entries()) {
        const auto* got = out.find(s);
        REQUIRE(got);
        for (std::size_t k = 0; k < opts.size(); ++k) {
          CHECK((*got)[k].target == opts[k].target);
          CHECK(std::abs((*got)[k].scores.p_t_given_s - opts[k].scores.p_t_given_s) < 1e-9);
          CHECK(std::abs((*got)[k].scores.p_s_given_t - opts[k].scores.p_s_given_t) < 1e-9);
          CHECK(std::abs((*got)[k].scores.lex_t_given_s - opts[k].scores.lex_t_given_s) < 1e-9);
          CHECK(std::abs((*got)[k].scores.lex_s_given_t - opts[k].scores.lex_s_given_t) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("total probability through two pivots") {
    tm::PhraseTable sp, pt;
    sp.add({"s"}, {"p1"}, scores(0.6, 1, 0.6, 1));
    sp.add({"s"}, {"p2"}, scores(0.4, 1, 0.4, 1));
    pt.add({"p1"}, {"t"}, scores(1, 0.5, 1, 0.5, 3));
    pt.add({"p2"}, {"t"}, scores(1, 0.5, 1, 0.5, 3));
    auto out = pivot::triangulate(sp, pt);
    REQUIRE(out.size() == 1);
    const auto& s = out.find("s")->front().scores;
    CHECK(s.p_t_given_s == doctest::Approx(1.0));
    CHECK(s.p_s_given_t == doctest::Approx(1.0));
    CHECK(s.joint_count == 2);
  }

  TEST_CASE("triangulation equals the triple-loop oracle") {
    oracle::Rand rng(99);
    for (int trial = 0; trial < 50; ++trial) {
      auto sp = oracle::random_table(rng, kSrc, kPiv, 1 + rng.below(10));
      auto pt = oracle::random_table(rng, kPiv, kTgt, 1 + rng.below(10));
      auto want = oracle::triple_loop_triangulation(sp, pt);
      if (want.empty()) continue;
      check_close(pivot::triangulate(sp, pt), want);
      check_close(pivot::triangulate(sp, pt, std::nullopt, 3), want);
    }
  }

  TEST_CASE("triangulated conditionals are sub-distributions") {
    oracle::Rand rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      auto out = pivot::triangulate(oracle::random_table(rng, kSrc, kPiv, 10), oracle::random_table(rng, kPiv, kTgt, 10));
      std::map<std::string, double> by_tgt;
      for (const auto& [s, opts] : out.entries()) {
        double total = 0;
        for (const auto& o : opts) {
          total += o.scores.p_t_given_s;
          by_tgt[join(o.target)] += o.scores.p_s_given_t;
        }
        CHECK(total <= 1 + 1e-6);
      }
      for (const auto& [t, total] : by_tgt) CHECK(total <= 1 + 1e-6);
    }
  }

  TEST_CASE("triangulation commutes with inversion") {
    oracle::Rand rng(21);
    for (int trial = 0; trial < 30; ++trial) {
      auto a = oracle::random_table(rng, kSrc, kPiv, 10);
      auto b = oracle::random_table(rng, kPiv, kTgt, 10);
      check_close(pivot::triangulate(a, b).inverted(), pivot::triangulate(b.inverted(), a.inverted()));
    }
  }

  TEST_CASE("no shared pivot phrase gives an empty table and a warning") {
    tm::PhraseTable sp, pt;
    sp.add({"a"}, {"p"}, scores(1, 1, 1, 1));
    pt.add({"q"}, {"x"}, scores(1, 1, 1, 1));
    log::Capture capture;
    CHECK(pivot::triangulate(sp, pt).empty());
    CHECK(capture.messages().size() == 1);
  }

  TEST_CASE("top-k keeps the most probable pivots") {
    tm::PhraseTable sp, pt;
    sp.add({"s"}, {"p1"}, scores(0.7, 1, 1, 1));
    sp.add({"s"}, {"p2"}, scores(0.2, 1, 1, 1));
    sp.add({"s"}, {"p3"}, scores(0.1, 1, 1, 1));
    pt.add({"p1"}, {"t1"}, scores(1, 1, 1, 1));
    pt.add({"p2"}, {"t2"}, scores(1, 1, 1, 1));
    pt.add({"p3"}, {"t3"}, scores(1, 1, 1, 1));
    auto out = pivot::triangulate(sp, pt, 2);
    REQUIRE(out.size() == 2);
    CHECK(out.find("s")->at(0).target == Phrase{"t1"});
    CHECK(out.find("s")->at(1).target == Phrase{"t2"});
  }

  TEST_CASE("cascade identity laws") {
    oracle::Rand rng(3);
    auto ident = identity_system({"w", "x", "y", "z", "a", "b", "c", "d"});
    for (int trial = 0; trial < 20; ++trial) {
      auto inst = oracle::random_toy_instance(rng, trial % 2 == 0);
      auto sys = toy_system(inst);
      std::vector<Sentence> sources = {inst.source, {inst.source.front()}};
      auto direct = sys.translate(sources);
      CHECK(pivot::cascade_translate(sources, sys, ident) == direct);
      CHECK(pivot::cascade_translate(sources, ident, sys) == direct);
    }
  }

  TEST_CASE("cascade errors name their stage") {
    auto ident = identity_system({"a"});
    auto broken = ident;
    broken.weights.lambda.pop_back();
    try {
      pivot::cascade_translate({{"a"}}, ident, broken);
      FAIL("expected a stage error");
    } catch (const pivot::StageError& e) {
      CHECK(e.stage() == "pt");
      CHECK(e.category() == ErrorCategory::config);
    }
    CHECK_THROWS_AS(pivot::cascade_translate({{"a"}}, broken, ident), pivot::StageError);
  }

  TEST_CASE("pseudo corpus with an identity system relabels the pivot side") {
    corpus::ParallelCorpus bitext({"src", "piv"});
    bitext.add_row({{"a", "b"}, {"p", "q"}});
    bitext.add_row({{"c"}, {"r", "s", "p"}});
    bitext.add_row({{"d"}, {}});
    auto ident = identity_system({"p", "q", "r", "s"});
    pivot::PseudoCorpusReport report;
    log::Capture capture;
    auto out = pivot::build_pseudo_corpus(bitext, "src", "piv", "tgt", ident, &report);
    CHECK(out.languages() == std::vector<std::string>{"src", "tgt"});
    REQUIRE(out.size() == 3);
    CHECK(out.column("src") == bitext.column("src"));
    CHECK(out.column("tgt") == bitext.column("piv"));
    CHECK(report.rows == 3);
    CHECK(report.empty_rows == std::vector<std::size_t>{2});
  }

  TEST_CASE("systems survive a save and load") {
    oracle::Rand rng(17);
    auto inst = oracle::random_toy_instance(rng, true);
    auto sys = toy_system(inst);
    sys.config.distortion_limit.reset();
    auto dir = std::filesystem::temp_directory_path() / "pivotsmt-system-test";
    std::filesystem::remove_all(dir);
    pivot::save_system(sys, dir);
    auto back = pivot::load_system(dir);
    CHECK(back.table == sys.table);
    CHECK(back.reordering == sys.reordering);
    CHECK(back.weights == sys.weights);
    CHECK(pivot::format_decoder_config(back.config) == pivot::format_decoder_config(sys.config));
    CHECK(back.translate({inst.source}) == sys.translate({inst.source}));
    std::filesystem::remove_all(dir);
    CHECK_THROWS_AS(pivot::load_system(dir), ConfigError);
  }
}
