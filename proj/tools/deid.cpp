// deid: Dutch de-identification toolkit.
//
// Subcommands: tokenize, deidentify, evaluate, kappa, build-dataset.
// Exit codes: 0 success, 1 input or configuration error, 2 backend failure.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deid/config.hpp"
#include "deid/corpus.hpp"
#include "deid/corpus_io.hpp"
#include "deid/dataset.hpp"
#include "deid/eval.hpp"
#include "deid/ner.hpp"
#include "deid/pipeline.hpp"
#include "deid/tokenizer.hpp"

namespace {

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw deid::ConfigError(std::string("cannot open ") + what + " file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path, const char* what) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw deid::ConfigError(std::string("cannot open ") + what + " file for writing: " + path);
  return out;
}

void run_tokenize(const std::string& config_path, const std::string& in_path,
                  const std::string& out_path) {
  deid::TokenizerConfig tokenizer;
  if (!config_path.empty()) tokenizer = deid::load_pipeline_config(config_path).tokenizer;
  const std::vector<deid::Document> corpus = deid::load_corpus(in_path);

  std::vector<std::vector<deid::TaggedToken>> docs;
  docs.reserve(corpus.size());
  for (const deid::Document& doc : corpus) {
    std::vector<deid::TaggedToken> tagged;
    for (deid::Token& token : deid::tokenize_document(doc, tokenizer))
      tagged.push_back({std::move(token), deid::IOB2Tag::o()});
    docs.push_back(std::move(tagged));
  }
  if (out_path.empty()) {
    deid::write_iob2(std::cout, docs);
  } else {
    std::ofstream out = open_output(out_path, "output");
    deid::write_iob2(out, docs);
  }
}

int run_deidentify(const std::string& config_path, const std::string& in_path,
                   const std::string& out_path, const std::string& report_path,
                   std::size_t workers, const std::string& ner_cmd,
                   const std::string& label_map_path) {
  deid::PipelineConfig config = deid::load_pipeline_config(config_path);
  if (workers > 0) config.workers = workers;
  if (!ner_cmd.empty()) {
    deid::BackendConfig backend;
    backend.kind = deid::BackendKind::External;
    backend.command = deid::split_command_line(ner_cmd);
    if (config.backend) backend.timeout = config.backend->timeout;
    config.backend = std::move(backend);
  }
  if (!label_map_path.empty()) {
    if (!config.backend)
      throw deid::ConfigError("--label-map requires a backend (config has kind = none)");
    config.backend->label_map = deid::load_label_map(label_map_path);
  }

  const std::vector<deid::Document> corpus = deid::load_corpus(in_path);
  const deid::PipelineResult result = deid::run_pipeline(corpus, config);

  {
    std::ofstream out = open_output(out_path, "output corpus");
    deid::write_corpus(out, result.documents);
  }
  if (!report_path.empty()) {
    std::ofstream out = open_output(report_path, "report");
    deid::write_report(out, result.reports);
  }

  std::cout << "documents\t" << result.documents.size() << '\n';
  std::cout << "failed\t" << result.failures.size() << '\n';
  const auto totals = deid::aggregate_counts(result.reports);
  for (deid::Label label : deid::all_labels)
    std::cout << deid::to_string(label) << '\t' << totals[static_cast<std::size_t>(label)]
              << '\n';

  for (const deid::DocumentFailure& failure : result.failures)
    std::cerr << "document '" << failure.doc_id << "' failed: " << failure.message << '\n';
  return result.failures.empty() ? 0 : 2;
}

void run_evaluate(const std::string& gold_path, const std::string& pred_path,
                  const std::string& mode_name, double overlap_fraction,
                  const std::string& out_path) {
  std::ifstream gold_in = open_input(gold_path, "gold annotations");
  const std::vector<deid::Annotation> gold = deid::read_annotations(gold_in, gold_path);
  const deid::PredictionsByDoc predictions = deid::load_predictions(pred_path);
  const deid::EvalMode mode =
      mode_name == "loose" ? deid::EvalMode::Loose : deid::EvalMode::Strict;

  const deid::EvalResult result =
      deid::evaluate_corpus(gold, predictions, mode, overlap_fraction);
  if (!out_path.empty()) {
    std::ofstream out = open_output(out_path, "evaluation TSV");
    deid::write_eval_tsv(out, result, mode);
  }
  std::cout << deid::render_eval_table(result, mode);
}

void run_kappa(const std::string& a_path, const std::string& b_path,
               const std::string& corpus_path) {
  const std::vector<deid::Document> corpus = deid::load_corpus(corpus_path);
  const std::vector<deid::Annotation> a = deid::load_annotations(a_path, corpus);
  const std::vector<deid::Annotation> b = deid::load_annotations(b_path, corpus);
  const deid::KappaResult result = deid::kappa_over_corpus(corpus, a, b);
  std::cout << std::fixed << std::setprecision(6);
  std::cout << "pr_a\t" << result.pr_a << '\n';
  std::cout << "pr_e\t" << result.pr_e << '\n';
  std::cout << "kappa\t" << result.kappa << '\n';
}

void run_build_dataset(const std::string& titles_path, const std::string& in_path,
                       const std::string& out_path, const std::string& stoplist_path,
                       const std::string& prefix) {
  deid::JobTitleList titles =
      deid::expand_job_titles(deid::load_title_list(titles_path), prefix);
  if (!stoplist_path.empty())
    titles = deid::apply_stoplist(std::move(titles), deid::load_title_list(stoplist_path));

  const std::vector<deid::Document> corpus = deid::load_corpus(in_path);
  const auto labeled = deid::label_texts(corpus, titles);

  std::vector<std::vector<deid::TaggedToken>> docs;
  docs.reserve(labeled.size());
  for (const auto& [doc, tagged] : labeled) docs.push_back(tagged);
  {
    std::ofstream out = open_output(out_path, "dataset");
    deid::write_iob2(out, docs);
  }

  const deid::DatasetStats stats = deid::dataset_stats(labeled);
  std::cout << "titles\t" << titles.titles.size() << '\n';
  std::cout << "tokens\t" << stats.token_count << '\n';
  std::cout << "entities\t" << stats.entity_count << '\n';
  std::cout << "distinct_titles\t" << stats.distinct_surface_count << '\n';
  for (const deid::SurfaceCount& entry : stats.top)
    std::cout << "top\t" << entry.surface << '\t' << entry.count << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dutch text de-identification toolkit"};
  app.require_subcommand(1);
  int exit_code = 0;

  // tokenize
  std::string tok_config, tok_in, tok_out;
  CLI::App* tokenize = app.add_subcommand(
      "tokenize", "Tokenize a corpus and write its tokens as IOB2 lines with all tags O");
  tokenize->add_option("--config", tok_config, "Pipeline config (for [tokenizer] settings)");
  tokenize->add_option("--in", tok_in, "Input corpus (doc_id<TAB>text per line)")->required();
  tokenize->add_option("--out", tok_out, "Output IOB2 file (default: standard output)");
  tokenize->callback([&] { run_tokenize(tok_config, tok_in, tok_out); });

  // deidentify
  std::string de_config, de_in, de_out, de_report, de_ner_cmd, de_label_map;
  std::size_t de_workers = 0;
  CLI::App* deidentify =
      app.add_subcommand("deidentify", "Suppress personal identifiers in a corpus");
  deidentify->add_option("--config", de_config, "Pipeline config file")->required();
  deidentify->add_option("--in", de_in, "Input corpus")->required();
  deidentify->add_option("--out", de_out, "Redacted output corpus")->required();
  deidentify->add_option("--report", de_report, "Suppression report TSV");
  deidentify->add_option("--workers", de_workers,
                         "Worker threads (overrides config; output is identical for any count)");
  deidentify->add_option("--ner-cmd", de_ner_cmd,
                         "External NER backend command line (overrides config)");
  deidentify->add_option("--label-map", de_label_map,
                         "Backend label map TSV: backend_label<TAB>target-or-DROP");
  deidentify->callback([&] {
    exit_code = run_deidentify(de_config, de_in, de_out, de_report, de_workers, de_ner_cmd,
                               de_label_map);
  });

  // evaluate
  std::string ev_gold, ev_pred, ev_mode = "strict", ev_out;
  double ev_fraction = 0.0;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Score predictions against gold annotations");
  evaluate->add_option("--gold", ev_gold, "Gold annotation TSV")->required();
  evaluate->add_option("--pred", ev_pred, "Predictions: suppression report or annotation TSV")
      ->required();
  evaluate->add_option("--mode", ev_mode, "Scoring mode")
      ->check(CLI::IsMember({"strict", "loose"}))
      ->capture_default_str();
  evaluate->add_option("--overlap-fraction", ev_fraction,
                       "Fraction of a gold span a prediction must cover (0 = any overlap)")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  evaluate->add_option("--out", ev_out, "Machine-readable result TSV");
  evaluate->callback([&] { run_evaluate(ev_gold, ev_pred, ev_mode, ev_fraction, ev_out); });

  // kappa
  std::string ka_a, ka_b, ka_corpus;
  CLI::App* kappa =
      app.add_subcommand("kappa", "Token-level Cohen's kappa between two annotators");
  kappa->add_option("--a", ka_a, "Annotator A annotation TSV")->required();
  kappa->add_option("--b", ka_b, "Annotator B annotation TSV")->required();
  kappa->add_option("--corpus", ka_corpus, "Corpus both annotators worked on")->required();
  kappa->callback([&] { run_kappa(ka_a, ka_b, ka_corpus); });

  // build-dataset
  std::string bd_titles, bd_in, bd_out, bd_stoplist, bd_prefix = "senior";
  CLI::App* build_dataset = app.add_subcommand(
      "build-dataset", "Build a job-title IOB2 dataset from raw texts and a title list");
  build_dataset->add_option("--titles", bd_titles, "Job-title list, one per line")->required();
  build_dataset->add_option("--in", bd_in, "Input corpus of raw texts")->required();
  build_dataset->add_option("--out", bd_out, "Output IOB2 dataset")->required();
  build_dataset->add_option("--stoplist", bd_stoplist, "Titles to exclude, one per line");
  build_dataset->add_option("--prefix", bd_prefix, "Seniority prefix to expand")
      ->capture_default_str();
  build_dataset->callback(
      [&] { run_build_dataset(bd_titles, bd_in, bd_out, bd_stoplist, bd_prefix); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const deid::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
