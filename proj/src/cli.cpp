#include "pivotsmt/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

#include "pivotsmt/align.hpp"
#include "pivotsmt/corpus.hpp"
#include "pivotsmt/error.hpp"
#include "pivotsmt/eval.hpp"
#include "pivotsmt/lm.hpp"
#include "pivotsmt/pipeline.hpp"
#include "pivotsmt/pivot.hpp"
#include "pivotsmt/synth.hpp"
#include "pivotsmt/tm.hpp"
#include "pivotsmt/util.hpp"

namespace pivotsmt::cli {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kDecoderKeys = {"beam_size", "distortion_limit", "nbest_size", "use_lex_reordering",
                                               "table_limit"};
const std::vector<std::string> kPrepareKeys = {"corpus",   "langs",    "source_lang", "target_lang",
                                               "pivot_lang", "selection_lang", "profile", "max_len",
                                               "max_ratio", "dev_size", "test_size", "pool_factor", "order"};
const std::vector<std::string> kTrainKeys = {"order", "ibm_iterations", "max_phrase_len", "tune_rounds"};
const std::vector<std::string> kInputPathKeys = {"in",  "hyp", "ref", "a",      "b",       "src",     "tgt",
                                                 "align", "tm", "lm", "system", "dev_src", "dev_ref", "sp",
                                                 "pt",  "sp_sys", "pt_sys"};

std::vector<std::string> concat(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto& p : parts)
    for (const auto& k : p)
      if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  return out;
}

class Report {
 public:
  Report(std::string command, const PipelineConfig& config, const CommandSpec& spec) {
    lines_.push_back("command: " + command);
    lines_.push_back("[settings]");
    for (const auto& key : spec.keys) {
      try {
        lines_.push_back(key + " = " + config.get(key));
      } catch (const ConfigError&) {
      }
    }
    lines_.push_back("[results]");
  }
  void add(const std::string& key, const std::string& value) { lines_.push_back(key + ": " + value); }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, std::size_t value) { add(key, std::to_string(value)); }
  std::string text() const { return join(lines_, "\n") + "\n"; }

 private:
  std::vector<std::string> lines_;
};

std::string format_bleu(const eval::BleuReport& r) { return eval::summary_line(r); }

decoder::DecoderConfig decoder_config(const PipelineConfig& c) {
  decoder::DecoderConfig d;
  d.beam_size = c.count("beam_size");
  d.distortion_limit = c.optional_count("distortion_limit");
  d.nbest_size = c.count("nbest_size");
  d.use_lex_reordering = c.flag("use_lex_reordering");
  d.table_limit = c.count("table_limit");
  d.max_phrase_len = c.count("max_phrase_len");
  return d;
}

pipeline::TrainOptions train_options(const PipelineConfig& c) {
  pipeline::TrainOptions o;
  o.lm_order = static_cast<int>(c.count("order"));
  o.ibm_iterations = static_cast<int>(c.count("ibm_iterations"));
  o.max_phrase_len = c.count("max_phrase_len");
  o.tune_rounds = static_cast<int>(c.count("tune_rounds"));
  o.decoder = decoder_config(c);
  o.jobs = c.count("jobs");
  return o;
}

std::vector<std::string> corpus_langs(const PipelineConfig& c) {
  if (c.has("langs")) return c.list("langs");
  std::vector<std::string> langs = {c.get("source_lang")};
  if (c.has("pivot_lang")) langs.push_back(c.get("pivot_lang"));
  langs.push_back(c.get("target_lang"));
  return langs;
}

pipeline::PrepareOptions prepare_options(const PipelineConfig& c, const std::vector<std::string>& langs) {
  pipeline::PrepareOptions o;
  o.filter.max_len = c.count("max_len");
  o.filter.max_ratio = c.real("max_ratio");
  o.filter.pivot_lang = c.has("pivot_lang") ? c.get("pivot_lang") : langs.front();
  o.selection.selection_lang = c.get("selection_lang");
  o.selection.dev_size = c.count("dev_size");
  o.selection.test_size = c.count("test_size");
  o.selection.pool_factor = c.count("pool_factor");
  o.selection_lm_order = static_cast<int>(c.count("order"));
  auto known = [&](const std::string& tag) { return std::find(langs.begin(), langs.end(), tag) != langs.end(); };
  if (!known(o.filter.pivot_lang)) throw ConfigError("pivot_lang " + o.filter.pivot_lang + " is not among langs");
  if (!known(o.selection.selection_lang)) {
    throw ConfigError("selection_lang " + o.selection.selection_lang + " is not among langs");
  }
  return o;
}

corpus::CorpusSplit prepare_split(const PipelineConfig& c, Report& report, const fs::path& out_dir) {
  auto langs = corpus_langs(c);
  auto raw = corpus::load_corpus(c.path("corpus"), langs, corpus::parse_profile(c.get("profile")));
  auto split = pipeline::prepare(raw, prepare_options(c, langs));
  for (const auto& [name, part, rows] :
       {std::tuple{"train", &split.train, &split.train_rows}, std::tuple{"dev", &split.dev, &split.dev_rows},
        std::tuple{"test", &split.test, &split.test_rows}}) {
    corpus::save_corpus(*part, out_dir / name);
    std::string ids;
    for (auto r : *rows) ids += std::to_string(r) + '\n';
    write_file_atomic(out_dir / (std::string(name) + ".rows"), ids);
  }
  report.add("input_rows", raw.size());
  report.add("filtered_rows", split.train.size() + split.dev.size() + split.test.size());
  report.add("train_rows", split.train.size());
  report.add("dev_rows", split.dev.size());
  report.add("test_rows", split.test.size());
  return split;
}

std::string history_text(const std::vector<double>& h) {
  std::vector<std::string> parts;
  for (double b : h) parts.push_back(format_double(b));
  return parts.empty() ? "-" : join(parts);
}

void add_train_report(Report& report, const std::string& name, const pipeline::TrainReport& r) {
  report.add(name + ".train_rows", r.train_rows);
  report.add(name + ".phrase_pairs", r.phrase_pairs);
  report.add(name + ".reordering_entries", r.reordering_entries);
  report.add(name + ".tuning_bleu", history_text(r.tuning_bleu));
}

eval::BleuReport evaluate_output(const std::vector<Sentence>& hyp, const std::vector<Sentence>& ref,
                                 const fs::path& hyp_path) {
  write_sentences(hyp_path, hyp);
  return eval::bleu_corpus(hyp, ref);
}

// Command handlers return the default report location.
using Handler = fs::path (*)(const PipelineConfig&, Report&);

fs::path cmd_prepare(const PipelineConfig& c, Report& report) {
  fs::path out = c.path("out");
  prepare_split(c, report, out);
  return out / "report.txt";
}

fs::path cmd_build_lm(const PipelineConfig& c, Report& report) {
  auto corpus = read_sentences(c.path("in"));
  auto model = lm::train_kn(corpus, static_cast<int>(c.count("order")));
  lm::save_arpa(model, c.path("out"));
  report.add("sentences", corpus.size());
  report.add("vocabulary", model.vocab().size());
  report.add("perplexity", lm::perplexity(model, corpus));
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_align(const PipelineConfig& c, Report& report) {
  auto src = read_sentences(c.path("src"));
  auto tgt = read_sentences(c.path("tgt"));
  if (src.size() != tgt.size()) throw AlignmentError("source and target files differ in length");
  align::Lexicon fwd, rev;
  auto alignments =
      align::align_corpus(src, tgt, static_cast<int>(c.count("ibm_iterations")), c.count("jobs"), &fwd, &rev);
  fs::path out = c.path("out");
  align::save_alignments(out / "alignments.txt", alignments);
  align::save_lexicon(fwd, out / "lex.s2t.txt");
  align::save_lexicon(rev, out / "lex.t2s.txt");
  std::size_t links = 0;
  for (const auto& a : alignments) links += a.size();
  report.add("sentence_pairs", src.size());
  report.add("links", links);
  return out / "report.txt";
}

fs::path cmd_build_tm(const PipelineConfig& c, Report& report) {
  auto src = read_sentences(c.path("src"));
  auto tgt = read_sentences(c.path("tgt"));
  fs::path align_dir = c.path("align");
  auto alignments = align::load_alignments(align_dir / "alignments.txt", src, tgt);
  auto fwd = align::load_lexicon(align_dir / "lex.s2t.txt");
  auto rev = align::load_lexicon(align_dir / "lex.t2s.txt");
  const std::size_t max_len = c.count("max_phrase_len");
  auto table = tm::build_phrase_table(src, tgt, alignments, fwd, rev, max_len, c.count("jobs"));
  fs::path out = c.path("out");
  tm::save_table(table, out / "phrase-table.txt");
  report.add("phrase_pairs", table.size());
  if (c.flag("use_lex_reordering")) {
    auto reo = tm::estimate_lex_reordering(src, tgt, alignments, max_len);
    tm::save_reordering(reo, out / "reordering-table.txt");
    report.add("reordering_entries", reo.size());
  }
  return out / "report.txt";
}

fs::path cmd_tune(const PipelineConfig& c, Report& report) {
  pivot::TranslationSystem system;
  system.config = decoder_config(c);
  fs::path tm_dir = c.path("tm");
  system.table = tm::load_table(tm_dir / "phrase-table.txt");
  if (system.config.use_lex_reordering) {
    if (!fs::exists(tm_dir / "reordering-table.txt")) {
      throw ConfigError(tm_dir.string() + " has no reordering-table.txt; set use_lex_reordering = false");
    }
    system.reordering = tm::load_reordering(tm_dir / "reordering-table.txt");
  }
  system.lm = lm::load_arpa(c.path("lm"));
  system.weights = decoder::FeatureWeights::initial(system.config.use_lex_reordering);
  auto history = pipeline::tune_system(system, read_sentences(c.path("dev_src")), read_sentences(c.path("dev_ref")),
                                       static_cast<int>(c.count("tune_rounds")), c.count("jobs"));
  pivot::save_system(system, c.path("out"));
  report.add("tuning_bleu", history_text(history));
  auto names = decoder::feature_names(system.config.use_lex_reordering);
  for (std::size_t f = 0; f < names.size(); ++f) report.add("weight." + names[f], system.weights.lambda[f]);
  return c.path("out") / "report.txt";
}

pivot::TranslationSystem load_system_with_overrides(const PipelineConfig& c, const std::string& key) {
  auto system = pivot::load_system(c.path(key));
  if (c.has("beam_size")) system.config.beam_size = c.count("beam_size");
  if (c.has("distortion_limit")) system.config.distortion_limit = c.optional_count("distortion_limit");
  if (c.has("nbest_size")) system.config.nbest_size = c.count("nbest_size");
  if (c.has("table_limit")) system.config.table_limit = c.count("table_limit");
  return system;
}

fs::path cmd_translate(const PipelineConfig& c, Report& report) {
  auto system = load_system_with_overrides(c, "system");
  auto input = read_sentences(c.path("in"));
  const std::size_t jobs = c.count("jobs");
  auto models = system.models();
  if (c.has("nbest_out")) {
    auto lists = parallel_map(input.size(), jobs, [&](std::size_t i) {
      return decoder::nbest(input[i], models, system.weights, system.config);
    });
    std::string text;
    std::vector<Sentence> best;
    for (std::size_t i = 0; i < lists.size(); ++i) {
      text += decoder::format_nbest(i, lists[i], system.config.use_lex_reordering);
      best.push_back(lists[i].front().target);
    }
    write_file_atomic(c.path("nbest_out"), text);
    write_sentences(c.path("out"), best);
  } else {
    write_sentences(c.path("out"), system.translate(input, jobs));
  }
  report.add("sentences", input.size());
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_triangulate(const PipelineConfig& c, Report& report) {
  auto sp = tm::load_table(c.path("sp"));
  auto pt = tm::load_table(c.path("pt"));
  auto table = pivot::triangulate(sp, pt, c.optional_count("top_k"), c.count("jobs"));
  tm::save_table(table, c.path("out"));
  report.add("sp_pairs", sp.size());
  report.add("pt_pairs", pt.size());
  report.add("triangulated_pairs", table.size());
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_cascade(const PipelineConfig& c, Report& report) {
  auto sp = load_system_with_overrides(c, "sp_sys");
  auto pt = load_system_with_overrides(c, "pt_sys");
  auto input = read_sentences(c.path("in"));
  write_sentences(c.path("out"), pivot::cascade_translate(input, sp, pt, c.count("jobs")));
  report.add("sentences", input.size());
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_pseudo(const PipelineConfig& c, Report& report) {
  const std::string s = c.get("source_lang"), p = c.get("pivot_lang"), t = c.get("target_lang");
  auto bitext = corpus::load_corpus(c.path("sp_corpus"), {s, p}, corpus::TokenizerProfile::pretokenized);
  auto pt = load_system_with_overrides(c, "pt_sys");
  pivot::PseudoCorpusReport r;
  auto pseudo = pivot::build_pseudo_corpus(bitext, s, p, t, pt, &r, c.count("jobs"));
  corpus::save_corpus(pseudo, c.path("out"));
  report.add("rows", r.rows);
  report.add("empty_rows", r.empty_rows.size());
  std::vector<std::string> ids;
  for (auto i : r.empty_rows) ids.push_back(std::to_string(i));
  report.add("empty_row_indices", ids.empty() ? "-" : join(ids));
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_mbr(const PipelineConfig& c, Report& report) {
  std::vector<std::vector<Sentence>> lists;
  for (const auto& f : c.list("lists")) lists.push_back(read_sentences(f));
  auto combined = eval::mbr_combine(lists);
  write_sentences(c.path("out"), combined);
  report.add("systems", lists.size());
  report.add("sentences", combined.size());
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_evaluate(const PipelineConfig& c, Report& report) {
  auto r = eval::bleu_corpus(read_sentences(c.path("hyp")), read_sentences(c.path("ref")));
  std::cout << eval::format_report(r) << eval::summary_line(r) << '\n';
  report.add("summary", eval::summary_line(r));
  return "report.txt";
}

fs::path cmd_significance(const PipelineConfig& c, Report& report) {
  const double level = c.real("level");
  auto v = eval::bootstrap_significance(read_sentences(c.path("a")), read_sentences(c.path("b")),
                                        read_sentences(c.path("ref")), c.count("samples"), level, c.seed("seed"),
                                        c.count("jobs"));
  std::string text = eval::format_verdict(v, level);
  std::cout << text << '\n';
  report.add("verdict", text);
  return "report.txt";
}

fs::path cmd_rquantity(const PipelineConfig& c, Report& report) {
  auto src = read_sentences(c.path("src"));
  auto tgt = read_sentences(c.path("tgt"));
  auto alignments = align::load_alignments(c.path("align"), src, tgt);
  auto result = eval::rquantity(alignments);
  std::cout << "RQuantity=" << format_double(result.average) << '\n';
  report.add("sentences", alignments.size());
  report.add("rquantity", result.average);
  return "report.txt";
}

fs::path cmd_make_fixture(const PipelineConfig& c, Report& report) {
  synth::FixtureOptions o;
  o.sentences = c.count("sentences");
  if (c.has("seed")) o.seed = c.seed("seed");
  auto corpus = synth::make_fixture(o);
  corpus::save_corpus(corpus, c.path("out"));
  report.add("rows", corpus.size());
  report.add("languages", join(corpus.languages()));
  report.add("seed", std::to_string(o.seed));
  return c.path("out").parent_path() / "report.txt";
}

fs::path cmd_pipeline_direct(const PipelineConfig& c, Report& report) {
  fs::path work = c.path("work_dir");
  auto split = prepare_split(c, report, work / "data");
  const std::string s = c.get("source_lang"), t = c.get("target_lang");
  pipeline::TrainReport tr;
  auto system = pipeline::train_system(split.train.column(s), split.train.column(t), split.dev.column(s),
                                       split.dev.column(t), train_options(c), &tr);
  pivot::save_system(system, work / "direct" / "system");
  add_train_report(report, "direct", tr);
  auto bleu = evaluate_output(system.translate(split.test.column(s), c.count("jobs")), split.test.column(t),
                              work / "direct" / "test.hyp");
  report.add("direct.test_bleu", format_bleu(bleu));
  std::cout << "direct " << format_bleu(bleu) << '\n';
  return work / "direct" / "report.txt";
}

fs::path cmd_pipeline_pivot(const PipelineConfig& c, Report& report) {
  if (!c.has("pivot_lang")) throw ConfigError("missing required key: pivot_lang");
  fs::path work = c.path("work_dir");
  auto split = prepare_split(c, report, work / "data");
  const std::string s = c.get("source_lang"), p = c.get("pivot_lang"), t = c.get("target_lang");
  const std::string strategy = c.get("strategy");
  const std::size_t jobs = c.count("jobs");
  const auto options = train_options(c);
  const auto test_src = split.test.column(s), test_ref = split.test.column(t);
  const auto dev_src = split.dev.column(s), dev_ref = split.dev.column(t);
  fs::path root = work / "pivot";
  auto wants = [&](const std::string& name) { return strategy == "all" || strategy == name; };

  pipeline::TrainReport tr;
  auto sp = pipeline::train_system(split.train.column(s), split.train.column(p), dev_src, split.dev.column(p),
                                   options, &tr);
  pivot::save_system(sp, root / "sp" / "system");
  add_train_report(report, "sp", tr);
  auto pt = pipeline::train_system(split.train.column(p), split.train.column(t), split.dev.column(p), dev_ref,
                                   options, &tr);
  pivot::save_system(pt, root / "pt" / "system");
  add_train_report(report, "pt", tr);

  std::vector<std::vector<Sentence>> outputs;
  auto record = [&](const std::string& name, const std::vector<Sentence>& hyp) {
    auto bleu = evaluate_output(hyp, test_ref, root / name / "test.hyp");
    report.add(name + ".test_bleu", format_bleu(bleu));
    std::cout << name << ' ' << format_bleu(bleu) << '\n';
    outputs.push_back(hyp);
  };

  if (wants("cascade")) record("cascade", pivot::cascade_translate(test_src, sp, pt, jobs));
  if (wants("pseudo")) {
    corpus::ParallelCorpus bitext = split.train.project({s, p});
    pivot::PseudoCorpusReport pr;
    auto pseudo = pivot::build_pseudo_corpus(bitext, s, p, t, pt, &pr, jobs);
    corpus::save_corpus(pseudo, root / "pseudo" / "corpus");
    report.add("pseudo.empty_rows", pr.empty_rows.size());
    auto system = pipeline::train_system(pseudo.column(s), pseudo.column(t), dev_src, dev_ref, options, &tr);
    pivot::save_system(system, root / "pseudo" / "system");
    add_train_report(report, "pseudo", tr);
    record("pseudo", system.translate(test_src, jobs));
  }
  if (wants("triangulation")) {
    pivot::TranslationSystem system;
    system.table = pivot::triangulate(sp.table, pt.table, c.optional_count("top_k"), jobs);
    system.lm = pt.lm;
    system.config = options.decoder;
    system.config.max_phrase_len = options.max_phrase_len;
    system.config.use_lex_reordering = false;
    system.weights = decoder::FeatureWeights::initial(false);
    auto history = options.tune_rounds > 0
                       ? pipeline::tune_system(system, dev_src, dev_ref, options.tune_rounds, jobs)
                       : std::vector<double>{};
    pivot::save_system(system, root / "triangulation" / "system");
    report.add("triangulation.phrase_pairs", system.table.size());
    report.add("triangulation.tuning_bleu", history_text(history));
    record("triangulation", system.translate(test_src, jobs));
  }
  if (strategy == "all") {
    auto combined = eval::mbr_combine(outputs);
    record("mbr", combined);
  }
  return root / "report.txt";
}

struct Entry {
  CommandSpec spec;
  Handler handler;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {{"prepare", "filter a corpus and split it into train/dev/test", concat({kPrepareKeys, {"out"}}),
        {"corpus", "out"}},
       cmd_prepare},
      {{"build-lm", "train a Kneser-Ney language model", {"in", "out", "order"}, {"in", "out"}}, cmd_build_lm},
      {{"align", "IBM Model 1 alignment with grow-diag-final-and", {"src", "tgt", "out", "ibm_iterations"},
        {"src", "tgt", "out"}},
       cmd_align},
      {{"build-tm", "extract and score a phrase table",
        {"src", "tgt", "align", "out", "max_phrase_len", "use_lex_reordering"}, {"src", "tgt", "align", "out"}},
       cmd_build_tm},
      {{"tune", "assemble a system and tune its weights on dev data",
        concat({{"tm", "lm", "dev_src", "dev_ref", "out", "tune_rounds", "max_phrase_len"}, kDecoderKeys}),
        {"tm", "lm", "dev_src", "dev_ref", "out"}},
       cmd_tune},
      {{"translate", "decode a file with a system",
        {"system", "in", "out", "nbest_out", "beam_size", "distortion_limit", "nbest_size", "table_limit"},
        {"system", "in", "out"}},
       cmd_translate},
      {{"triangulate", "combine two phrase tables through the pivot", {"sp", "pt", "out", "top_k"},
        {"sp", "pt", "out"}},
       cmd_triangulate},
      {{"cascade", "translate through the pivot with two systems",
        {"sp_sys", "pt_sys", "in", "out", "beam_size", "distortion_limit", "table_limit"},
        {"sp_sys", "pt_sys", "in", "out"}},
       cmd_cascade},
      {{"pseudo", "translate the pivot side of a source-pivot corpus",
        {"sp_corpus", "pt_sys", "out", "source_lang", "pivot_lang", "target_lang"},
        {"sp_corpus", "pt_sys", "out", "pivot_lang"}},
       cmd_pseudo},
      {{"mbr", "minimum Bayes risk combination of system outputs", {"lists", "out"}, {"lists", "out"}}, cmd_mbr},
      {{"evaluate", "corpus BLEU", {"hyp", "ref", "report"}, {"hyp", "ref"}}, cmd_evaluate},
      {{"significance", "paired bootstrap resampling", {"a", "b", "ref", "samples", "level", "seed", "report"},
        {"a", "b", "ref"}},
       cmd_significance},
      {{"rquantity", "reordering quantity of an aligned corpus", {"src", "tgt", "align", "report"},
        {"src", "tgt", "align"}},
       cmd_rquantity},
      {{"pipeline-direct", "prepare, train, tune and evaluate a direct system",
        concat({kPrepareKeys, kTrainKeys, kDecoderKeys, {"work_dir"}}), {"corpus", "work_dir"}},
       cmd_pipeline_direct},
      {{"pipeline-pivot", "train and evaluate the pivot strategies and their MBR combination",
        concat({kPrepareKeys, kTrainKeys, kDecoderKeys, {"work_dir", "strategy", "top_k"}}),
        {"corpus", "work_dir", "pivot_lang"}},
       cmd_pipeline_pivot},
      {{"make-fixture", "write the synthetic three-language corpus", {"out", "sentences", "seed"}, {"out"}},
       cmd_make_fixture},
  };
  return table;
}

const Entry* find_entry(const std::string& name) {
  for (const auto& e : entries())
    if (e.spec.name == name) return &e;
  return nullptr;
}

}  // namespace

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> specs = [] {
    std::vector<CommandSpec> out;
    for (const auto& e : entries()) {
      CommandSpec s = e.spec;
      s.keys.insert(s.keys.begin(), "jobs");
      if (std::find(s.keys.begin(), s.keys.end(), "report") == s.keys.end()) s.keys.push_back("report");
      out.push_back(std::move(s));
    }
    return out;
  }();
  return specs;
}

const CommandSpec* find_command(const std::string& name) {
  for (const auto& s : commands())
    if (s.name == name) return &s;
  return nullptr;
}

void run(const std::string& command, const PipelineConfig& config) {
  const Entry* entry = find_entry(command);
  const CommandSpec* spec = find_command(command);
  if (entry == nullptr || spec == nullptr) throw Error(ErrorCategory::usage, "unknown command: " + command);
  for (const auto& [key, value] : config.values()) {
    if (std::find(spec->keys.begin(), spec->keys.end(), key) == spec->keys.end()) {
      throw ConfigError("key " + key + " does not apply to " + command);
    }
  }
  for (const auto& key : spec->required) {
    if (!config.has(key)) throw ConfigError("missing required key for " + command + ": " + key);
  }
  for (const auto& key : kInputPathKeys) {
    if (config.has(key) && !fs::exists(config.path(key))) {
      throw ConfigError(key + ": path not found: " + config.get(key));
    }
  }
  if (config.has("lists")) {
    for (const auto& f : config.list("lists"))
      if (!fs::exists(f)) throw ConfigError("lists: path not found: " + f);
  }
  const auto start = std::chrono::steady_clock::now();
  Report report(command, config, *spec);
  fs::path report_path = entry->handler(config, report);
  report.add("seconds",
             std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  if (config.has("report")) report_path = config.path("report");
  write_file_atomic(report_path, report.text());
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    switch (err->category()) {
      case ErrorCategory::usage: return 2;
      case ErrorCategory::config: return 3;
      case ErrorCategory::data: return 4;
      case ErrorCategory::internal: return 5;
    }
  }
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return 4;
  return 5;
}

namespace {
std::string category_name(const std::exception& e) {
  switch (exit_code(e)) {
    case 2: return "usage";
    case 3: return "config";
    case 4: return "data";
    default: return "internal";
  }
}
}  // namespace

ParsedCommand parse_command_line(const std::vector<std::string>& args) {
  CLI::App app{"Phrase-based SMT with pivot-language strategies", "pivotsmt"};
  app.require_subcommand(1, 1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file; flags take precedence");

  std::map<std::string, std::map<std::string, std::vector<std::string>>> storage;
  for (const auto& spec : commands()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.help);
    sub->add_option("--config", config_path, "key = value settings file; flags take precedence");
    for (const auto& key : spec.keys) {
      const KeySpec* ks = find_key(key);
      auto& slot = storage[spec.name][key];
      std::string help = ks->help + (ks->default_value.empty() ? "" : " [" + ks->default_value + "]");
      auto* opt = sub->add_option(flag_name(key), slot, help);
      if (ks->type == KeyType::paths) {
        opt->expected(1, -1);
      } else {
        opt->expected(1);
      }
    }
  }

  ParsedCommand parsed;
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    parsed.help = true;
    std::cout << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return parsed;
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    throw Error(ErrorCategory::usage, e.what());
  }

  parsed.command = app.get_subcommands().front()->get_name();
  if (!config_path.empty()) {
    const CommandSpec* spec = find_command(parsed.command);
    const PipelineConfig file = load_config(config_path);
    for (const auto& [key, value] : file.values()) {
      if (std::find(spec->keys.begin(), spec->keys.end(), key) != spec->keys.end()) parsed.config.set(key, value);
    }
  }
  PipelineConfig overrides;
  for (const auto& [key, values] : storage[parsed.command]) {
    if (!values.empty()) overrides.set(key, join(values));
  }
  parsed.config.merge(overrides);
  return parsed;
}

int main_entry(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string command = "-";
  for (const auto& a : args) {
    if (find_command(a)) {
      command = a;
      break;
    }
  }
  try {
    ParsedCommand parsed = parse_command_line(args);
    if (parsed.help) return 0;
    command = parsed.command;
    run(parsed.command, parsed.config);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << category_name(e) << ": " << command << ": " << e.what() << '\n';
    return exit_code(e);
  }
}

}  // namespace pivotsmt::cli
