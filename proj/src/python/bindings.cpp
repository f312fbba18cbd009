#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pivotsmt/align.hpp"
#include "pivotsmt/cli.hpp"
#include "pivotsmt/corpus.hpp"
#include "pivotsmt/error.hpp"
#include "pivotsmt/eval.hpp"
#include "pivotsmt/lm.hpp"
#include "pivotsmt/pivot.hpp"
#include "pivotsmt/synth.hpp"
#include "pivotsmt/tm.hpp"

namespace py = pybind11;
using namespace pivotsmt;

namespace {

align::AlignmentMatrix to_matrix(const Sentence& src, const Sentence& tgt, const std::string& pharaoh) {
  return align::parse_pharaoh(pharaoh, src.size(), tgt.size());
}

py::dict scores_dict(const tm::PhraseScores& s) {
  py::dict d;
  d["p_t_given_s"] = s.p_t_given_s;
  d["p_s_given_t"] = s.p_s_given_t;
  d["lex_t_given_s"] = s.lex_t_given_s;
  d["lex_s_given_t"] = s.lex_s_given_t;
  d["joint_count"] = s.joint_count;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phrase-based SMT with pivot-language strategies";

  static py::exception<Error> error(m, "PivotSmtError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "tokenize",
      [](const std::string& line, const std::string& profile) {
        return corpus::tokenize(line, corpus::parse_profile(profile));
      },
      py::arg("line"), py::arg("profile") = "plain");

  py::class_<lm::NGramModel>(m, "LanguageModel")
      .def_static("train", &lm::train_kn, py::arg("corpus"), py::arg("order"))
      .def_static("load", &lm::load_arpa, py::arg("path"))
      .def("save", [](const lm::NGramModel& model, const std::filesystem::path& p) { lm::save_arpa(model, p); })
      .def_property_readonly("order", &lm::NGramModel::order)
      .def("logprob", [](const lm::NGramModel& model, const Sentence& s) { return lm::logprob(model, s); })
      .def("perplexity", [](const lm::NGramModel& model, const std::vector<Sentence>& corpus) {
        return lm::perplexity(model, corpus);
      });

  m.def(
      "train_ibm1",
      [](const std::vector<Sentence>& src, const std::vector<Sentence>& tgt, int iterations) {
        auto r = align::train_ibm1(src, tgt, iterations);
        std::map<std::pair<std::string, std::string>, double> probs;
        for (const auto& row : r.lexicon.rows()) probs[{row.source, row.target}] = row.prob;
        return py::make_tuple(probs, r.log_likelihood);
      },
      py::arg("src"), py::arg("tgt"), py::arg("iterations") = 5,
      "Returns ({(source, target): t(source | target)}, log-likelihood per iteration).");

  m.def(
      "align_corpus",
      [](const std::vector<Sentence>& src, const std::vector<Sentence>& tgt, int iterations) {
        std::vector<std::string> out;
        for (const auto& a : align::align_corpus(src, tgt, iterations)) out.push_back(align::format_pharaoh(a));
        return out;
      },
      py::arg("src"), py::arg("tgt"), py::arg("iterations") = 5, "Symmetrized alignments in Pharaoh format.");

  m.def(
      "extract_phrases",
      [](const Sentence& src, const Sentence& tgt, const std::string& alignment, std::size_t max_len) {
        std::vector<py::tuple> out;
        for (const auto& p : tm::extract_phrases(src, tgt, to_matrix(src, tgt, alignment), max_len))
          out.push_back(py::make_tuple(p.src, p.tgt, py::make_tuple(p.src_first, p.src_last),
                                       py::make_tuple(p.tgt_first, p.tgt_last)));
        return out;
      },
      py::arg("src"), py::arg("tgt"), py::arg("alignment"), py::arg("max_len") = 10);

  py::class_<tm::PhraseTable>(m, "PhraseTable")
      .def(py::init<>())
      .def_static("load", &tm::load_table, py::arg("path"))
      .def("save", [](const tm::PhraseTable& t, const std::filesystem::path& p) { tm::save_table(t, p); })
      .def("__len__", &tm::PhraseTable::size)
      .def("add",
           [](tm::PhraseTable& t, const Phrase& src, const Phrase& tgt, double p_t_given_s, double p_s_given_t,
              double lex_t_given_s, double lex_s_given_t, double count) {
             tm::PhraseScores s;
             s.p_t_given_s = p_t_given_s;
             s.p_s_given_t = p_s_given_t;
             s.lex_t_given_s = lex_t_given_s;
             s.lex_s_given_t = lex_s_given_t;
             s.joint_count = s.src_count = s.tgt_count = count;
             t.add(src, tgt, s);
           },
           py::arg("src"), py::arg("tgt"), py::arg("p_t_given_s"), py::arg("p_s_given_t"), py::arg("lex_t_given_s"),
           py::arg("lex_s_given_t"), py::arg("count") = 1.0)
      .def("options",
           [](const tm::PhraseTable& t, const std::string& src) {
             std::vector<py::tuple> out;
             if (const auto* opts = t.find(src))
               for (const auto& o : *opts) out.push_back(py::make_tuple(o.target, scores_dict(o.scores)));
             return out;
           })
      .def("inverted", &tm::PhraseTable::inverted);

  m.def(
      "build_phrase_table",
      [](const std::vector<Sentence>& src, const std::vector<Sentence>& tgt, const std::vector<std::string>& links,
         int iterations, std::size_t max_len) {
        if (links.size() != src.size() || src.size() != tgt.size())
          throw DataError("source, target and alignment counts differ");
        std::vector<align::AlignmentMatrix> al;
        for (std::size_t i = 0; i < src.size(); ++i) al.push_back(to_matrix(src[i], tgt[i], links[i]));
        auto fwd = align::train_ibm1(src, tgt, iterations).lexicon;
        auto rev = align::train_ibm1(tgt, src, iterations).lexicon;
        return tm::build_phrase_table(src, tgt, al, fwd, rev, max_len);
      },
      py::arg("src"), py::arg("tgt"), py::arg("alignments"), py::arg("ibm_iterations") = 5, py::arg("max_len") = 7);

  m.def("triangulate", &pivot::triangulate, py::arg("sp"), py::arg("pt"), py::arg("top_k") = std::nullopt,
        py::arg("jobs") = 1);

  py::class_<pivot::TranslationSystem>(m, "TranslationSystem")
      .def_static("load", &pivot::load_system, py::arg("path"))
      .def("save", [](const pivot::TranslationSystem& s, const std::filesystem::path& p) { pivot::save_system(s, p); })
      .def("translate", &pivot::TranslationSystem::translate, py::arg("sources"), py::arg("jobs") = 1);

  m.def(
      "bleu",
      [](const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
        auto r = eval::bleu_corpus(hyps, refs);
        py::dict d;
        d["bleu"] = r.bleu;
        d["precisions"] = std::vector<double>(r.precisions.begin(), r.precisions.end());
        d["brevity_penalty"] = r.brevity_penalty;
        d["hyp_len"] = r.hyp_len;
        d["ref_len"] = r.ref_len;
        return d;
      },
      py::arg("hyps"), py::arg("refs"));
  m.def("sentence_bleu", &eval::bleu_sentence, py::arg("hyp"), py::arg("ref"));
  m.def("mbr_select", &eval::mbr_select, py::arg("candidates"), py::arg("posterior") = std::vector<double>{});
  m.def("mbr_combine", &eval::mbr_combine, py::arg("outputs"));
  m.def(
      "bootstrap",
      [](const std::vector<Sentence>& a, const std::vector<Sentence>& b, const std::vector<Sentence>& refs,
         std::size_t samples, double level, std::uint64_t seed) {
        auto v = eval::bootstrap_significance(a, b, refs, samples, level, seed);
        const char* winner = v.confident_winner == eval::Winner::a ? "a" : v.confident_winner == eval::Winner::b ? "b" : "none";
        py::dict d;
        d["wins_a"] = v.wins_a;
        d["wins_b"] = v.wins_b;
        d["ties"] = v.ties;
        d["winner"] = winner;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("refs"), py::arg("samples") = 1000, py::arg("level") = 0.99,
      py::arg("seed") = 1);
  m.def(
      "rquantity",
      [](const std::vector<Sentence>& src, const std::vector<Sentence>& tgt, const std::vector<std::string>& links) {
        if (links.size() != src.size() || src.size() != tgt.size())
          throw DataError("source, target and alignment counts differ");
        std::vector<align::AlignmentMatrix> al;
        for (std::size_t i = 0; i < src.size(); ++i) al.push_back(to_matrix(src[i], tgt[i], links[i]));
        return eval::rquantity(al).average;
      },
      py::arg("src"), py::arg("tgt"), py::arg("alignments"));

  m.def(
      "make_fixture",
      [](std::size_t sentences, std::uint64_t seed) {
        auto c = synth::make_fixture({sentences, seed});
        std::map<std::string, std::vector<Sentence>> out;
        for (const auto& lang : c.languages()) out[lang] = c.column(lang);
        return out;
      },
      py::arg("sentences") = 2000, py::arg("seed") = synth::kFixtureSeed);

  m.def(
      "run",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "pivotsmt");
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        py::gil_scoped_release release;
        return cli::main_entry(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs a command-line invocation in-process and returns its exit code.");
}
