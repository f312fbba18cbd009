#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "oracles.hpp"
#include "pivotsmt/decoder.hpp"
#include "pivotsmt/error.hpp"
#include "pivotsmt/lm.hpp"

using namespace pivotsmt;
using namespace pivotsmt::decoder;

namespace {

Models models_of(const oracle::ToyInstance& inst) {
  return {&inst.table, inst.config.use_lex_reordering ? &inst.reordering : nullptr, &inst.lm};
}

tm::PhraseScores flat(double p) {
  tm::PhraseScores s;
  s.p_t_given_s = s.p_s_given_t = s.lex_t_given_s = s.lex_s_given_t = p;
  s.joint_count = s.src_count = s.tgt_count = 1;
  return s;
}

std::vector<std::string> split(const std::string& text, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (auto pos = text.find(sep); pos != std::string::npos; pos = text.find(sep, start)) {
    out.push_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
  out.push_back(text.substr(start));
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  auto out = split(text, "\n");
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

}  // namespace

TEST_SUITE("decoder") {
  TEST_CASE("distortion cost uses the gap convention") {
    CHECK(distortion_cost(1, 2) == 0.0);
    CHECK(distortion_cost(1, 5) == 3.0);
    CHECK(distortion_cost(-1, 0) == 0.0);
    CHECK(distortion_cost(4, 0) == 5.0);
    for (long long d = 1; d < 10; ++d) CHECK(distortion_cost(0, 1 + 2 * d) == 2 * distortion_cost(0, 1 + d));
  }

  TEST_CASE("a single covering phrase") {
    tm::PhraseTable table;
    table.add({"a", "b"}, {"x", "y"}, flat(0.5));
    auto lm = lm::train_kn({{"x", "y"}, {"y", "x"}}, 2);
    DecoderConfig config;
    config.use_lex_reordering = false;
    auto weights = FeatureWeights::initial(false);
    auto t = decode({"a", "b"}, {&table, nullptr, &lm}, weights, config);
    CHECK(t.target == Sentence{"x", "y"});
    REQUIRE(t.features.size() == kBaseFeatureCount);
    for (std::size_t f = 0; f < 4; ++f) CHECK(t.features[f] == doctest::Approx(std::log(0.5)));
    CHECK(t.features[kPhrasePenalty] == -1.0);
    CHECK(t.features[kWordPenalty] == -2.0);
    CHECK(t.features[kLanguageModel] == doctest::Approx(lm::logprob(lm, {"x", "y"}) * std::log(10.0)));
    CHECK(t.features[kDistortion] == 0.0);
    CHECK(t.score == doctest::Approx(dot(weights.lambda, t.features)).epsilon(1e-12));
  }

  TEST_CASE("unknown words are copied with floor scores") {
    tm::PhraseTable table;
    table.add({"a"}, {"x"}, flat(0.5));
    auto lm = lm::train_kn({{"x"}}, 2);
    DecoderConfig config;
    config.use_lex_reordering = false;
    auto t = decode({"q"}, {&table, nullptr, &lm}, FeatureWeights::initial(false), config);
    CHECK(t.target == Sentence{"q"});
    for (std::size_t f = 0; f < 4; ++f) CHECK(t.features[f] == kFloorLogScore);
    CHECK(decode({}, {&table, nullptr, &lm}, FeatureWeights::initial(false), config).target.empty());
  }

  TEST_CASE("configuration errors") {
    tm::PhraseTable table;
    auto lm = lm::train_kn({{"x"}}, 2);
    DecoderConfig config;
    config.use_lex_reordering = false;
    CHECK_THROWS_AS(decode({"a"}, {&table, nullptr, &lm}, FeatureWeights::initial(true), config), ConfigError);
    config.use_lex_reordering = true;
    CHECK_THROWS_AS(decode({"a"}, {&table, nullptr, &lm}, FeatureWeights::initial(true), config), ConfigError);
    config.use_lex_reordering = false;
    config.beam_size = 0;
    CHECK_THROWS_AS(decode({"a"}, {&table, nullptr, &lm}, FeatureWeights::initial(false), config), ConfigError);
  }

  TEST_CASE("decode and nbest equal exhaustive enumeration") {
    oracle::Rand rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      const bool lexro = trial % 2 == 1;
      auto inst = oracle::random_toy_instance(rng, lexro);
      auto models = models_of(inst);
      auto expected = oracle::enumerate_translations(inst.source, models, inst.weights, inst.config);
      REQUIRE(!expected.empty());
      auto best = decode(inst.source, models, inst.weights, inst.config);
      CHECK(std::abs(best.score - expected[0].score) < 1e-9);
      CHECK(best.score == doctest::Approx(dot(inst.weights.lambda, best.features)).epsilon(1e-12));
      auto list = nbest(inst.source, models, inst.weights, inst.config);
      REQUIRE(list.size() == std::min(inst.config.nbest_size, expected.size()));
      CHECK(join(list[0].target) == join(best.target));
      // Equal-score strings may differ in summation order, so ranks are compared up to 1e-9 ties.
      std::map<std::string, double> oracle_score;
      for (const auto& d : expected) oracle_score[d.target] = d.score;
      for (std::size_t k = 0; k < list.size(); ++k) {
        auto it = oracle_score.find(join(list[k].target));
        REQUIRE(it != oracle_score.end());
        CHECK(std::abs(it->second - expected[k].score) < 1e-9);
        CHECK(std::abs(list[k].score - expected[k].score) < 1e-9);
      }
    }
  }

  TEST_CASE("a one-best list is the decode result") {
    oracle::Rand rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      auto inst = oracle::random_toy_instance(rng, true);
      inst.config.nbest_size = 1;
      auto list = nbest(inst.source, models_of(inst), inst.weights, inst.config);
      auto best = decode(inst.source, models_of(inst), inst.weights, inst.config);
      REQUIRE(list.size() == 1);
      CHECK(list[0].target == best.target);
      CHECK(list[0].features == best.features);
    }
  }

  TEST_CASE("nbest lists are sorted and distinct") {
    oracle::Rand rng(6);
    for (int trial = 0; trial < 30; ++trial) {
      auto inst = oracle::random_toy_instance(rng, trial % 2 == 0);
      inst.config.nbest_size = 50;
      auto list = nbest(inst.source, models_of(inst), inst.weights, inst.config);
      std::set<std::string> seen;
      for (std::size_t k = 0; k < list.size(); ++k) {
        CHECK(seen.insert(join(list[k].target)).second);
        if (k > 0) CHECK(list[k].score <= list[k - 1].score);
      }
    }
  }

  TEST_CASE("a heavier word penalty never lengthens the re-ranked best") {
    oracle::Rand rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      auto inst = oracle::random_toy_instance(rng, false);
      inst.config.nbest_size = 30;
      auto list = nbest(inst.source, models_of(inst), inst.weights, inst.config);
      auto best_len = [&](const std::vector<double>& w) {
        std::size_t arg = 0;
        for (std::size_t k = 1; k < list.size(); ++k)
          if (dot(w, list[k].features) > dot(w, list[arg].features)) arg = k;
        return list[arg].target.size();
      };
      auto w = inst.weights.lambda;
      std::size_t previous = best_len(w);
      for (int step = 0; step < 10; ++step) {
        w[kWordPenalty] += 0.5;
        std::size_t len = best_len(w);
        CHECK(len <= previous);
        previous = len;
      }
    }
  }

  TEST_CASE("corpus decoding does not depend on the worker count") {
    oracle::Rand rng(31);
    auto inst = oracle::random_toy_instance(rng, true);
    std::vector<Sentence> sources;
    for (int k = 0; k < 12; ++k) {
      Sentence s = inst.source;
      std::rotate(s.begin(), s.begin() + static_cast<long>(k % s.size()), s.end());
      sources.push_back(s);
    }
    auto one = decode_corpus(sources, models_of(inst), inst.weights, inst.config, 1);
    auto four = decode_corpus(sources, models_of(inst), inst.weights, inst.config, 4);
    REQUIRE(one.size() == four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].target == four[i].target);
      CHECK(one[i].features == four[i].features);
      CHECK(one[i].score == four[i].score);
    }
  }

  TEST_CASE("nbest lines and weight files") {
    tm::PhraseTable table;
    table.add({"a"}, {"x"}, flat(0.5));
    table.add({"a"}, {"y"}, flat(0.25));
    auto lm = lm::train_kn({{"x"}, {"y"}}, 2);
    DecoderConfig config;
    config.use_lex_reordering = false;
    auto list = nbest({"a"}, {&table, nullptr, &lm}, FeatureWeights::initial(false), config);
    auto text = format_nbest(7, list, false);
    auto lines = split_lines(text);
    REQUIRE(lines.size() == 2);
    for (const auto& line : lines) {
      auto fields = split(line, " ||| ");
      REQUIRE(fields.size() == 4);
      CHECK(fields[0] == "7");
      auto pairs = split_ws(fields[2]);
      REQUIRE(pairs.size() == kBaseFeatureCount);
      auto names = feature_names(false);
      for (std::size_t f = 0; f < pairs.size(); ++f) CHECK(pairs[f].rfind(names[f] + ":", 0) == 0);
    }
    CHECK(split(lines[0], " ||| ")[1] == "x");

    auto path = std::filesystem::temp_directory_path() / "pivotsmt-weights-test.txt";
    FeatureWeights w = FeatureWeights::initial(true);
    w.lambda[3] = -0.125;
    save_weights(w, true, path);
    CHECK(load_weights(path, true) == w);
    CHECK_THROWS_AS(load_weights(path, false), ConfigError);
    std::filesystem::remove(path);
  }

  TEST_CASE("pool ascent raises the separating feature") {
    CandidatePool pool(3);
    std::vector<Sentence> refs;
    for (int i = 0; i < 3; ++i) {
      Sentence ref = {"w" + std::to_string(i), "a", "b", "c", "d"};
      refs.push_back(ref);
      pool[i].push_back({{"z", "z", "z", "z", "z"}, {0.0, 1.0}});
      pool[i].push_back({ref, {1.0, 0.0}});
    }
    auto before = pool_bleu(pool, refs, {1.0, 2.0});
    CHECK(before == 0.0);
    auto sweep = optimize_on_pool(pool, refs, {1.0, 2.0}, 3);
    CHECK(sweep.weights[0] > 1.0);
    CHECK(pool_bleu(pool, refs, sweep.weights) == doctest::Approx(1.0));
    for (std::size_t k = 1; k < sweep.bleu_history.size(); ++k)
      CHECK(sweep.bleu_history[k] >= sweep.bleu_history[k - 1]);

    auto fixed = optimize_on_pool(pool, refs, {3.0, 1.0}, 3);
    CHECK(fixed.weights == std::vector<double>{3.0, 1.0});
  }

  TEST_CASE("tuning a reachable dev set keeps the initial weights") {
    tm::PhraseTable table;
    const Sentence src = {"a", "b", "c", "d", "e"}, tgt = {"v", "w", "x", "y", "z"};
    for (std::size_t i = 0; i < src.size(); ++i) table.add({src[i]}, {tgt[i]}, flat(0.9));
    auto lm = lm::train_kn({tgt}, 3);
    DecoderConfig config;
    config.use_lex_reordering = false;
    config.nbest_size = 20;
    auto result = tune_weights({src, src}, {tgt, tgt}, {&table, nullptr, &lm}, config, 3);
    CHECK(result.weights == FeatureWeights::initial(false));
    for (std::size_t k = 1; k < result.bleu_history.size(); ++k)
      CHECK(result.bleu_history[k] >= result.bleu_history[k - 1]);
    auto again = tune_weights({src, src}, {tgt, tgt}, {&table, nullptr, &lm}, config, 3, 2);
    CHECK(again.weights == result.weights);
    CHECK_THROWS_AS(tune_weights({}, {}, {&table, nullptr, &lm}, config, 3), TuningError);
  }
}
