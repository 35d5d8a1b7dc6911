// revmatch: train/predict star-rating models and audit review-rating
// mismatches. Single binary, subcommand style.

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revmatch/corpus.hpp"
#include "revmatch/deptree.hpp"
#include "revmatch/errors.hpp"
#include "revmatch/eval.hpp"
#include "revmatch/pipeline.hpp"
#include "revmatch/rng.hpp"
#include "revmatch/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace revmatch;

namespace {

// ---------- config-file merging ----------
// A config file is a JSON object keyed by long option names ("seed",
// "model-kind", ...). Values act as defaults; anything given on the command
// line wins. Unknown keys are ignored so a resolved echo can be fed back
// verbatim to any compatible command.

json load_config_file(int argc, char** argv) {
  std::string path;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) path = arg.substr(9);
  }
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("FileNotFound: config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw UsageError(std::string("BadConfig: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("BadConfig: config must be an object");
  return doc;
}

template <class T>
void merge_opt(const CLI::App* cmd, const json& cfg, const std::string& key,
               T& var) {
  if (!cfg.contains(key)) return;
  if (cmd->count("--" + key) > 0) return;  // explicit flag wins
  try {
    var = cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError("BadConfig: bad value for \"" + key + "\"");
  }
}

void write_echo(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("WriteFailed: " + path.string());
  out << doc.dump(2) << "\n";
}

// ---------- shared option bundles ----------

struct CorpusOpts {
  std::string corpus;
  std::string format = "auto";  // jsonl | csv | auto (by extension)
  std::string parses;
  bool strict = false;

  void add_flags(CLI::App* cmd, bool required = true) {
    auto* opt = cmd->add_option("--corpus", corpus, "review corpus file");
    if (required) opt->required();
    cmd->add_option("--format", format, "corpus format: jsonl|csv|auto")
        ->check(CLI::IsMember({"jsonl", "csv", "auto"}));
    cmd->add_option("--parses", parses, "CoNLL-U dependency parses");
    cmd->add_flag("--strict", strict, "reject reviews with empty text");
  }

  void merge(const CLI::App* cmd, const json& cfg) {
    merge_opt(cmd, cfg, "corpus", corpus);
    merge_opt(cmd, cfg, "format", format);
    merge_opt(cmd, cfg, "parses", parses);
    merge_opt(cmd, cfg, "strict", strict);
  }

  corpus::Corpus load() const {
    corpus::LoadOptions opts;
    std::string fmt = format;
    if (fmt == "auto")
      fmt = corpus.size() >= 4 && corpus.substr(corpus.size() - 4) == ".csv"
                ? "csv"
                : "jsonl";
    opts.format =
        fmt == "csv" ? corpus::CorpusFormat::Csv : corpus::CorpusFormat::Jsonl;
    opts.allow_empty_text = !strict;
    return corpus::load_reviews(corpus, opts);
  }

  std::optional<deptree::ParseMap> load_parses() const {
    if (parses.empty()) return std::nullopt;
    return deptree::load_conllu_file(parses);
  }

  void echo_into(json& doc) const {
    doc["corpus"] = corpus;
    doc["format"] = format;
    doc["parses"] = parses;
    doc["strict"] = strict;
  }
};

struct ModelOpts {
  std::string kind = "handcrafted+nb";
  std::string embeddings;
  int vocab_min_count = 1;
  // dcnn hyperparameters
  int embed_dim = 100;
  int filters = 100;
  int k_ancestor = 3;
  int k_sibling = 3;
  int k_seq = 3;
  double dropout = 0.5;
  int epochs = 10;
  int batch_size = 1;
  // baseline hyperparameters
  int knn_k = 3;
  bool knn_cosine = false;
  int boost_rounds = 10;
  int oner_bins = 10;
  int min_leaf = 2;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--model-kind", kind,
                    "dcnn or <representation>+<algorithm>, e.g. "
                    "handcrafted+nb, tfidf+knn, wordvec+tree");
    cmd->add_option("--embeddings", embeddings,
                    "word-vector file for wordvec representations");
    cmd->add_option("--vocab-min-count", vocab_min_count);
    cmd->add_option("--embed-dim", embed_dim);
    cmd->add_option("--filters", filters);
    cmd->add_option("--k-ancestor", k_ancestor);
    cmd->add_option("--k-sibling", k_sibling);
    cmd->add_option("--k-seq", k_seq);
    cmd->add_option("--dropout", dropout);
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--batch-size", batch_size);
    cmd->add_option("--knn-k", knn_k);
    cmd->add_flag("--knn-cosine", knn_cosine);
    cmd->add_option("--boost-rounds", boost_rounds);
    cmd->add_option("--oner-bins", oner_bins);
    cmd->add_option("--min-leaf", min_leaf);
  }

  void merge(const CLI::App* cmd, const json& cfg) {
    merge_opt(cmd, cfg, "model-kind", kind);
    merge_opt(cmd, cfg, "embeddings", embeddings);
    merge_opt(cmd, cfg, "vocab-min-count", vocab_min_count);
    merge_opt(cmd, cfg, "embed-dim", embed_dim);
    merge_opt(cmd, cfg, "filters", filters);
    merge_opt(cmd, cfg, "k-ancestor", k_ancestor);
    merge_opt(cmd, cfg, "k-sibling", k_sibling);
    merge_opt(cmd, cfg, "k-seq", k_seq);
    merge_opt(cmd, cfg, "dropout", dropout);
    merge_opt(cmd, cfg, "epochs", epochs);
    merge_opt(cmd, cfg, "batch-size", batch_size);
    merge_opt(cmd, cfg, "knn-k", knn_k);
    merge_opt(cmd, cfg, "knn-cosine", knn_cosine);
    merge_opt(cmd, cfg, "boost-rounds", boost_rounds);
    merge_opt(cmd, cfg, "oner-bins", oner_bins);
    merge_opt(cmd, cfg, "min-leaf", min_leaf);
  }

  pipeline::TrainSpec to_spec(std::uint64_t seed) const {
    pipeline::TrainSpec spec;
    spec.kind = kind;
    spec.embeddings_path = embeddings;
    spec.vocab_min_count = vocab_min_count;
    spec.seed = seed;
    spec.net.embed_dim = embed_dim;
    spec.net.filters = filters;
    spec.net.k_ancestor = k_ancestor;
    spec.net.k_sibling = k_sibling;
    spec.net.k_seq = k_seq;
    spec.net.dropout = dropout;
    spec.net.epochs = epochs;
    spec.net.batch_size = batch_size;
    spec.net.seed = seed;
    spec.baseline.knn_k = knn_k;
    spec.baseline.knn_cosine = knn_cosine;
    spec.baseline.boost_rounds = boost_rounds;
    spec.baseline.oner_bins = oner_bins;
    spec.baseline.min_leaf = min_leaf;
    return spec;
  }

  void echo_into(json& doc) const {
    doc["model-kind"] = kind;
    doc["embeddings"] = embeddings;
    doc["vocab-min-count"] = vocab_min_count;
    doc["embed-dim"] = embed_dim;
    doc["filters"] = filters;
    doc["k-ancestor"] = k_ancestor;
    doc["k-sibling"] = k_sibling;
    doc["k-seq"] = k_seq;
    doc["dropout"] = dropout;
    doc["epochs"] = epochs;
    doc["batch-size"] = batch_size;
    doc["knn-k"] = knn_k;
    doc["knn-cosine"] = knn_cosine;
    doc["boost-rounds"] = boost_rounds;
    doc["oner-bins"] = oner_bins;
    doc["min-leaf"] = min_leaf;
  }
};

// ---------- subcommand state ----------

struct Cli {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  CorpusOpts corpus;
  ModelOpts model;
  std::string model_path;       // predict / mismatch-report input
  std::string annotations;      // agreement
  int k = 10;
  int parallel_folds = 1;
  int n = 100;
  std::string mix;              // synth star weights "w1,w2,w3,w4,w5"
};

std::array<double, 5> parse_mix(const std::string& text) {
  std::array<double, 5> mix{0.2, 0.2, 0.2, 0.2, 0.2};
  if (text.empty()) return mix;
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    if (i >= 5) throw UsageError("BadConfig: mix needs exactly 5 weights");
    try {
      mix[i++] = std::stod(part);
    } catch (const std::exception&) {
      throw UsageError("BadConfig: bad mix weight \"" + part + "\"");
    }
  }
  if (i != 5) throw UsageError("BadConfig: mix needs exactly 5 weights");
  return mix;
}

json base_echo(const std::string& command, const Cli& cli) {
  json doc;
  doc["command"] = command;
  doc["seed"] = cli.seed;
  doc["out"] = cli.out;
  return doc;
}

// ---------- commands ----------

int cmd_train(const Cli& cli, const CLI::App* cmd, const json& cfg) {
  (void)cmd;
  (void)cfg;
  corpus::Corpus data = cli.corpus.load();
  auto parses = cli.corpus.load_parses();
  pipeline::TrainSpec spec = cli.model.to_spec(cli.seed);
  pipeline::TrainedModel model =
      pipeline::train(data, spec, parses ? &*parses : nullptr);
  pipeline::save(model, cli.out);

  json history = {{"epoch_loss", model.history.epoch_loss},
                  {"epoch_accuracy", model.history.epoch_accuracy}};
  write_echo(history, cli.out + ".history.json");

  json echo = base_echo("train", cli);
  cli.corpus.echo_into(echo);
  cli.model.echo_into(echo);
  write_echo(echo, cli.out + ".config.json");
  std::cout << "model written to " << cli.out << "\n";
  return 0;
}

int cmd_predict(const Cli& cli, const CLI::App*, const json&) {
  pipeline::TrainedModel model = pipeline::load(cli.model_path);
  corpus::Corpus data = cli.corpus.load();
  auto parses = cli.corpus.load_parses();
  std::vector<pipeline::Prediction> preds =
      pipeline::predict(model, data, parses ? &*parses : nullptr);

  std::ofstream out(cli.out);
  if (!out) throw DataError("WriteFailed: " + cli.out);
  for (const auto& p : preds) {
    json line = {{"id", p.review_id},
                 {"predicted", p.rating.value()},
                 {"scores", p.scores}};
    out << line.dump() << "\n";
  }
  if (!out) throw DataError("WriteFailed: " + cli.out);

  json echo = base_echo("predict", cli);
  echo["model"] = cli.model_path;
  cli.corpus.echo_into(echo);
  write_echo(echo, cli.out + ".config.json");
  return 0;
}

int cmd_mismatch_report(const Cli& cli, const CLI::App*, const json&) {
  pipeline::TrainedModel model = pipeline::load(cli.model_path);
  corpus::Corpus data = cli.corpus.load();
  auto parses = cli.corpus.load_parses();
  std::map<std::string, corpus::StarRating> predictions;
  for (const auto& p :
       pipeline::predict(model, data, parses ? &*parses : nullptr))
    predictions.emplace(p.review_id, p.rating);

  eval::EvalReport report = eval::prevalence_report(data, predictions);

  fs::path dir(cli.out);
  fs::create_directories(dir);
  write_echo(eval::report_to_json(report), dir / "report.json");
  {
    std::ofstream txt(dir / "report.txt");
    txt << eval::report_to_text(report);
    std::ofstream conf(dir / "confusion.csv");
    conf << eval::confusion_to_csv(report.confusion);
    std::ofstream chart(dir / "chart.csv");
    chart << eval::chart_data_csv(report);
  }
  json echo = base_echo("mismatch-report", cli);
  echo["model"] = cli.model_path;
  cli.corpus.echo_into(echo);
  write_echo(echo, dir / "config.json");
  std::cout << eval::report_to_text(report);
  return 0;
}

int cmd_crossval(const Cli& cli, const CLI::App*, const json&) {
  if (cli.k < 2) throw UsageError("BadK: need k >= 2");
  if (cli.parallel_folds < 1)
    throw UsageError("BadConfig: parallel-folds must be >= 1");
  corpus::Corpus data = cli.corpus.load();
  auto parses = cli.corpus.load_parses();
  const deptree::ParseMap* parse_ptr = parses ? &*parses : nullptr;
  eval::FoldPlan plan =
      eval::kfold_plan(static_cast<int>(data.size()), cli.k, cli.seed);

  // Each fold refits everything on its own training rows with its own
  // derived seed, so results do not depend on the parallelism degree.
  std::vector<double> per_fold(plan.folds.size(), 0.0);
  std::vector<std::string> fold_errors(plan.folds.size());
  auto run_fold = [&](std::size_t f) {
    std::vector<bool> in_test(data.size(), false);
    for (int i : plan.folds[f]) in_test[static_cast<std::size_t>(i)] = true;
    corpus::Corpus train_split;
    for (std::size_t i = 0; i < data.size(); ++i)
      if (!in_test[i]) train_split.add(data.reviews()[i]);
    pipeline::TrainSpec spec =
        cli.model.to_spec(derive_seed(cli.seed, "fold", f));
    pipeline::TrainedModel model =
        pipeline::train(train_split, spec, parse_ptr);
    std::vector<corpus::StarRating> pred, truth;
    for (int i : plan.folds[f]) {
      const corpus::Review& review = data.reviews()[static_cast<std::size_t>(i)];
      pred.push_back(pipeline::predict_one(model, review, parse_ptr).rating);
      truth.push_back(*review.rating);
    }
    per_fold[f] = eval::accuracy(pred, truth);
  };

  if (cli.parallel_folds == 1) {
    for (std::size_t f = 0; f < plan.folds.size(); ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        std::size_t f = next.fetch_add(1);
        if (f >= plan.folds.size()) return;
        try {
          run_fold(f);
        } catch (const std::exception& e) {
          fold_errors[f] = e.what();
        }
      }
    };
    std::vector<std::thread> threads;
    int n_threads = std::min<int>(cli.parallel_folds,
                                  static_cast<int>(plan.folds.size()));
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    for (const auto& err : fold_errors)
      if (!err.empty()) throw DataError(err);
  }

  double mean = 0.0;
  for (double a : per_fold) mean += a;
  mean /= static_cast<double>(per_fold.size());

  json result = {{"k", cli.k},
                 {"seed", cli.seed},
                 {"model-kind", cli.model.kind},
                 {"per_fold", per_fold},
                 {"mean_accuracy", mean}};
  write_echo(result, cli.out);

  json echo = base_echo("crossval", cli);
  echo["k"] = cli.k;
  echo["parallel-folds"] = cli.parallel_folds;
  cli.corpus.echo_into(echo);
  cli.model.echo_into(echo);
  write_echo(echo, cli.out + ".config.json");
  std::cout << result.dump(2) << "\n";
  return 0;
}

int cmd_agreement(const Cli& cli, const CLI::App*, const json&) {
  corpus::Corpus data = cli.corpus.load();
  std::vector<corpus::AnnotatedReview> annotated =
      corpus::load_annotations(cli.annotations, data);
  if (annotated.empty()) throw DataError("EmptyDataset: no annotations");

  std::vector<std::array<int, 5>> items;
  std::vector<std::pair<corpus::StarRating, corpus::StarRating>> pairs;
  items.reserve(annotated.size());
  for (const auto& a : annotated) {
    std::array<int, 5> row{};
    for (corpus::StarRating r : a.annotator_ratings)
      row[static_cast<std::size_t>(r.value() - 1)]++;
    items.push_back(row);
    if (!a.review.rating)
      throw DataError("MissingRating: " + a.review.review_id);
    pairs.emplace_back(*a.review.rating,
                       corpus::consolidate_annotations(a.annotator_ratings));
  }
  double kappa = corpus::fleiss_kappa(items);
  auto [matrix, mismatches] = corpus::mismatch_matrix(pairs);

  fs::path dir(cli.out);
  fs::create_directories(dir);
  {
    std::ofstream consolidated(dir / "consolidated.jsonl");
    for (std::size_t i = 0; i < annotated.size(); ++i) {
      json line = {{"id", annotated[i].review.review_id},
                   {"rating", pairs[i].second.value()}};
      consolidated << line.dump() << "\n";
    }
    std::ofstream csv(dir / "matrix.csv");
    csv << eval::confusion_to_csv(matrix);
  }
  json summary = {{"kappa", kappa},
                  {"reviews", annotated.size()},
                  {"mismatches", mismatches},
                  {"mismatch_pct", 100.0 * static_cast<double>(mismatches) /
                                       static_cast<double>(annotated.size())}};
  write_echo(summary, dir / "summary.json");

  json echo = base_echo("agreement", cli);
  echo["annotations"] = cli.annotations;
  cli.corpus.echo_into(echo);
  write_echo(echo, dir / "config.json");
  std::cout << "kappa: " << kappa << "\n"
            << "mismatches: " << mismatches << "/" << annotated.size() << "\n";
  return 0;
}

int cmd_synth(const Cli& cli, const CLI::App*, const json&) {
  if (cli.n < 1) throw UsageError("BadConfig: n must be >= 1");
  synth::SynthSpec spec;
  spec.n = cli.n;
  spec.seed = cli.seed;
  spec.mix = parse_mix(cli.mix);
  corpus::Corpus data = synth::generate(spec);
  synth::write_jsonl(data, cli.out);

  json echo = base_echo("synth", cli);
  echo["n"] = cli.n;
  echo["mix"] = cli.mix;
  write_echo(echo, cli.out + ".config.json");
  std::cout << "wrote " << data.size() << " reviews to " << cli.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Cli cli;
  CLI::App app{"app-review star-rating models and review-rating mismatch "
               "auditing"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", cli.config_path,
                    "JSON config file (flags override it)");
    cmd->add_option("--seed", cli.seed, "run seed");
    return cmd;
  };

  CLI::App* train = add_common(app.add_subcommand("train", "train a model"));
  cli.corpus.add_flags(train);
  cli.model.add_flags(train);
  train->add_option("--out", cli.out, "model output path")->required();

  CLI::App* predict =
      add_common(app.add_subcommand("predict", "predict star ratings"));
  cli.corpus.add_flags(predict);
  predict->add_option("--model", cli.model_path, "trained model file")
      ->required();
  predict->add_option("--out", cli.out, "predictions JSONL path")->required();

  CLI::App* report = add_common(app.add_subcommand(
      "mismatch-report", "audit predicted vs original ratings"));
  cli.corpus.add_flags(report);
  report->add_option("--model", cli.model_path, "trained model file")
      ->required();
  report->add_option("--out", cli.out, "report output directory")->required();

  CLI::App* crossval = add_common(
      app.add_subcommand("crossval", "k-fold cross-validated accuracy"));
  cli.corpus.add_flags(crossval);
  cli.model.add_flags(crossval);
  crossval->add_option("--k", cli.k, "fold count");
  crossval->add_option("--parallel-folds", cli.parallel_folds,
                       "train up to this many folds concurrently");
  crossval->add_option("--out", cli.out, "result JSON path")->required();

  CLI::App* agreement = add_common(
      app.add_subcommand("agreement", "annotator agreement statistics"));
  cli.corpus.add_flags(agreement);
  agreement->add_option("--annotations", cli.annotations, "annotations JSONL")
      ->required();
  agreement->add_option("--out", cli.out, "output directory")->required();

  CLI::App* synth = add_common(
      app.add_subcommand("synth", "generate a synthetic rated corpus"));
  synth->add_option("--n", cli.n, "review count");
  synth->add_option("--mix", cli.mix, "star weights w1,w2,w3,w4,w5");
  synth->add_option("--out", cli.out, "corpus JSONL path")->required();

  try {
    json cfg = load_config_file(argc, argv);

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "UsageError: " << e.what() << "\n";
      return 1;
    }

    CLI::App* cmd = app.get_subcommands().front();
    merge_opt(cmd, cfg, "seed", cli.seed);
    merge_opt(cmd, cfg, "out", cli.out);
    cli.corpus.merge(cmd, cfg);
    cli.model.merge(cmd, cfg);
    merge_opt(cmd, cfg, "model", cli.model_path);
    merge_opt(cmd, cfg, "annotations", cli.annotations);
    merge_opt(cmd, cfg, "k", cli.k);
    merge_opt(cmd, cfg, "parallel-folds", cli.parallel_folds);
    merge_opt(cmd, cfg, "n", cli.n);
    merge_opt(cmd, cfg, "mix", cli.mix);

    if (cmd == train) return cmd_train(cli, cmd, cfg);
    if (cmd == predict) return cmd_predict(cli, cmd, cfg);
    if (cmd == report) return cmd_mismatch_report(cli, cmd, cfg);
    if (cmd == crossval) return cmd_crossval(cli, cmd, cfg);
    if (cmd == agreement) return cmd_agreement(cli, cmd, cfg);
    if (cmd == synth) return cmd_synth(cli, cmd, cfg);
    std::cerr << "UsageError: unknown command\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "UsageError: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "DataError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "InternalError: " << e.what() << "\n";
    return 3;
  }
}
