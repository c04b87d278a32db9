#include "newsrank/cli.hpp"

#include <cstdio>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "newsrank/annotation.hpp"
#include "newsrank/annotation_server.hpp"
#include "newsrank/corpus.hpp"
#include "newsrank/error.hpp"
#include "newsrank/eval.hpp"
#include "newsrank/interpret.hpp"
#include "newsrank/models.hpp"
#include "newsrank/stopwords.hpp"
#include "newsrank/text.hpp"

namespace newsrank::cli {

namespace {

namespace fs = std::filesystem;

struct CorpusOptions {
  std::string path;
  std::string corpus_id;
};

struct SplitOptions {
  std::string train_start, train_end, test_start, test_end;
  bool include_weekends = false;
};

struct SampleOptions {
  std::size_t balance_cap = 45000;
  std::uint64_t seed = 0;
};

struct VocabOptions {
  VocabConfig config;
  std::string field = "body";
  std::string stopwords;
};

void add_corpus(CLI::App* cmd, CorpusOptions& o) {
  cmd->add_option("--corpus", o.path, "Corpus JSON Lines file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--corpus-id", o.corpus_id, "Corpus tag (default: file stem)");
}

void add_split(CLI::App* cmd, SplitOptions& o) {
  cmd->add_option("--train-start", o.train_start, "Train range start YYYY-MM-DD (inclusive)");
  cmd->add_option("--train-end", o.train_end, "Train range end YYYY-MM-DD (exclusive)");
  cmd->add_option("--test-start", o.test_start, "Test range start YYYY-MM-DD (inclusive)");
  cmd->add_option("--test-end", o.test_end, "Test range end YYYY-MM-DD (exclusive)");
  cmd->add_flag("--include-weekends", o.include_weekends, "Keep Saturday/Sunday documents");
}

void add_sampling(CLI::App* cmd, SampleOptions& o) {
  cmd->add_option("--balance-cap", o.balance_cap, "Per-class cap for balanced sampling (0 = off)")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for sampling and training")->required();
}

void add_vocab(CLI::App* cmd, VocabOptions& o) {
  cmd->add_option("--min-df", o.config.min_df, "Minimum document-frequency proportion")
      ->capture_default_str();
  cmd->add_option("--max-df", o.config.max_df, "Maximum document-frequency proportion")
      ->capture_default_str();
  cmd->add_option("--max-size", o.config.max_size, "Vocabulary size cap")->capture_default_str();
  cmd->add_option("--ngram-max", o.config.ngram_max, "Largest n-gram (1 or 2)")
      ->capture_default_str()
      ->check(CLI::Range(1, 2));
  cmd->add_option("--stopwords", o.stopwords, "Stopword file, one term per line")
      ->check(CLI::ExistingFile);
}

void add_field(CLI::App* cmd, std::string& field) {
  cmd->add_option("--field", field, "Text field: body or alt_text")
      ->capture_default_str()
      ->check(CLI::IsMember({"body", "alt_text"}));
}

std::string corpus_id_of(const CorpusOptions& o) {
  return o.corpus_id.empty() ? fs::path(o.path).stem().string() : o.corpus_id;
}

std::vector<Document> load(const CorpusOptions& o) { return load_corpus(o.path, corpus_id_of(o)); }

Date require_date(const std::string& text, const char* flag) {
  auto d = parse_date(text);
  if (!d) throw ConfigError(std::string(flag) + ": expected YYYY-MM-DD, got '" + text + "'");
  return *d;
}

enum class Part { train, test };

/// Labeled documents for one side of the split; the whole corpus when no
/// ranges are configured.
std::vector<LabeledDocument> select(const std::vector<Document>& docs, const SplitOptions& o,
                                    Part part) {
  const auto labeled = derive_labels(docs);
  const bool any = !o.train_start.empty() || !o.train_end.empty() || !o.test_start.empty() ||
                   !o.test_end.empty();
  if (!any) {
    if (o.include_weekends) return labeled;
    std::vector<LabeledDocument> out;
    for (const auto& d : labeled)
      if (!d.document.date || !is_weekend(*d.document.date)) out.push_back(d);
    return out;
  }
  if (o.train_start.empty() || o.train_end.empty() || o.test_start.empty() || o.test_end.empty())
    throw ConfigError("a split needs all of --train-start/--train-end/--test-start/--test-end");
  SplitSpec spec{{require_date(o.train_start, "--train-start"), require_date(o.train_end, "--train-end")},
                 {require_date(o.test_start, "--test-start"), require_date(o.test_end, "--test-end")},
                 !o.include_weekends};
  auto split = apply_split(labeled, spec);
  if (split.missing_date > 0)
    std::cerr << "warning: " << split.missing_date << " documents without a date were excluded\n";
  return part == Part::train ? std::move(split.train) : std::move(split.test);
}

std::vector<LabeledDocument> training_docs(const CorpusOptions& c, const SplitOptions& s,
                                           const SampleOptions& sample) {
  auto docs = select(load(c), s, Part::train);
  std::cerr << "seed: " << sample.seed << "\n";
  if (sample.balance_cap == 0) return docs;
  return balanced_sample(docs, sample.balance_cap, sample.seed);
}

std::set<std::string> read_stopwords(const std::string& path) {
  std::set<std::string> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword file " + path);
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.insert(line);
  }
  return out;
}

std::vector<Document> plain(const std::vector<LabeledDocument>& docs) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.document);
  return out;
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw ConfigError(std::string(flag) + ": expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::unique_ptr<Scorer> make_scorer(const std::string& model, const std::string& vocab,
                                    const std::string& scores) {
  if (!scores.empty()) {
    if (!model.empty()) throw ConfigError("use either --model or --scores, not both");
    return std::make_unique<TableScorer>(load_external_scores(scores));
  }
  if (model.empty() || vocab.empty()) throw ConfigError("--model and --vocab are required");
  return load_model_scorer(model, Vocabulary::load(vocab), fs::path(model).stem().string());
}

AnnotationServer* g_server = nullptr;
void handle_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"newsrank: newsworthiness ranking pipeline"};
  app.set_config("--config", "", "TOML-style config file; command-line flags win");
  app.require_subcommand(1);

  // ingest
  CorpusOptions ingest_corpus;
  bool ingest_labeled = false;
  auto* ingest = app.add_subcommand("ingest", "Validate and count a corpus");
  add_corpus(ingest, ingest_corpus);
  ingest->add_flag("--labeled", ingest_labeled, "Derive front-page labels and report class counts");

  // build-vocab
  CorpusOptions bv_corpus;
  SplitOptions bv_split;
  SampleOptions bv_sample;
  VocabOptions bv_vocab;
  std::string bv_out;
  auto* build_vocab_cmd = app.add_subcommand("build-vocab", "Build a thresholded n-gram vocabulary");
  add_corpus(build_vocab_cmd, bv_corpus);
  add_split(build_vocab_cmd, bv_split);
  add_sampling(build_vocab_cmd, bv_sample);
  add_vocab(build_vocab_cmd, bv_vocab);
  add_field(build_vocab_cmd, bv_vocab.field);
  build_vocab_cmd->add_option("--out", bv_out, "Vocabulary JSON output")->required();

  // mine-stopwords
  CorpusOptions ms_corpus;
  SplitOptions ms_split;
  SampleOptions ms_sample;
  VocabOptions ms_vocab;
  int ms_rounds = 3;
  std::size_t ms_top_k = 20;
  bool ms_auto = false;
  std::string ms_out;
  auto* mine = app.add_subcommand("mine-stopwords", "Iteratively surface leaking terms via LR");
  add_corpus(mine, ms_corpus);
  add_split(mine, ms_split);
  add_sampling(mine, ms_sample);
  add_vocab(mine, ms_vocab);
  add_field(mine, ms_vocab.field);
  mine->add_option("--rounds", ms_rounds, "Training/review rounds")->capture_default_str();
  mine->add_option("--top-k", ms_top_k, "Terms surfaced per round")->capture_default_str();
  mine->add_flag("--auto-confirm", ms_auto, "Confirm every surfaced term without prompting");
  mine->add_option("--out", ms_out, "Stopword file output")->required();

  // train
  CorpusOptions tr_corpus;
  SplitOptions tr_split;
  SampleOptions tr_sample;
  std::string tr_vocab, tr_family = "logreg", tr_out, tr_field = "body";
  LogRegConfig lr_config;
  EmbBagConfig eb_config;
  std::optional<int> tr_epochs;
  std::optional<double> tr_lr;
  std::optional<std::size_t> tr_batch;
  auto* train = app.add_subcommand("train", "Train a logreg or embbag model");
  add_corpus(train, tr_corpus);
  add_split(train, tr_split);
  add_sampling(train, tr_sample);
  add_field(train, tr_field);
  train->add_option("--vocab", tr_vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--family", tr_family, "Model family")
      ->capture_default_str()
      ->check(CLI::IsMember({"logreg", "embbag"}));
  train->add_option("--epochs", tr_epochs, "Epochs (default 5)");
  train->add_option("--lr", tr_lr, "Learning rate (default 0.1 logreg, 0.05 embbag)");
  train->add_option("--batch-size", tr_batch, "Mini-batch size (default 64)");
  train->add_option("--l2", lr_config.l2, "L2 strength (logreg)")->capture_default_str();
  train->add_option("--dim", eb_config.dim, "Embedding width (embbag)")->capture_default_str();
  train->add_option("--out", tr_out, "Model JSON output")->required();

  // eval
  CorpusOptions ev_corpus;
  SplitOptions ev_split;
  std::string ev_model, ev_vocab, ev_scores, ev_field = "body";
  bool ev_brute = false;
  auto* eval_cmd = app.add_subcommand("eval", "AUC on a labeled split");
  add_corpus(eval_cmd, ev_corpus);
  add_split(eval_cmd, ev_split);
  add_field(eval_cmd, ev_field);
  eval_cmd->add_option("--model", ev_model, "Model JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--vocab", ev_vocab, "Vocabulary JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--scores", ev_scores, "External score table")->check(CLI::ExistingFile);
  eval_cmd->add_flag("--brute-force", ev_brute, "Recompute AUC by O(n^2) pairs and check equality");

  // rank
  CorpusOptions rk_corpus;
  std::string rk_model, rk_vocab, rk_scores, rk_out, rk_field = "body";
  std::size_t rk_top = 0;
  auto* rank = app.add_subcommand("rank", "Rank an unlabeled corpus");
  add_corpus(rank, rk_corpus);
  add_field(rank, rk_field);
  rank->add_option("--model", rk_model, "Model JSON")->check(CLI::ExistingFile);
  rank->add_option("--vocab", rk_vocab, "Vocabulary JSON")->check(CLI::ExistingFile);
  rank->add_option("--scores", rk_scores, "External score table")->check(CLI::ExistingFile);
  rank->add_option("--top", rk_top, "Write only the top N entries (0 = all)");
  rank->add_option("--out", rk_out, "Ranked JSON Lines output")->required();

  // kl
  std::vector<std::string> kl_corpora;
  double kl_smoothing = 0.5;
  std::size_t kl_max_vocab = kMaxKlVocab;
  std::string kl_out;
  auto* kl = app.add_subcommand("kl", "Pairwise unigram KL-divergence matrix");
  kl->add_option("--corpus", kl_corpora, "ID=PATH, repeatable")->required();
  kl->add_option("--smoothing", kl_smoothing, "Additive smoothing")->capture_default_str();
  kl->add_option("--max-vocab", kl_max_vocab, "Shared vocabulary cap")->capture_default_str();
  kl->add_option("--out", kl_out, "CSV output (default stdout)");

  // coeffs
  std::string cf_model, cf_vocab, cf_csv;
  std::size_t cf_k = 10;
  auto* coeffs = app.add_subcommand("coeffs", "Top positive/negative LR coefficients");
  coeffs->add_option("--model", cf_model, "Logreg model JSON")->required()->check(CLI::ExistingFile);
  coeffs->add_option("--vocab", cf_vocab, "Vocabulary JSON")->required()->check(CLI::ExistingFile);
  coeffs->add_option("-k,--k", cf_k, "Terms per sign")->capture_default_str();
  coeffs->add_option("--csv-prefix", cf_csv, "Write PREFIX.positive.csv and PREFIX.negative.csv");

  // serve
  std::vector<std::string> sv_corpora, sv_scorers, sv_tables;
  std::string sv_registry, sv_host = "127.0.0.1", sv_log_dir = "sessions", sv_ui_dir,
                           sv_field = "body";
  int sv_port = 8080;
  auto* serve = app.add_subcommand("serve", "Run the blind annotation service");
  serve->add_option("--corpus", sv_corpora, "ID=PATH, repeatable")->required();
  serve->add_option("--scorer", sv_scorers, "NAME=MODEL.json,VOCAB.json, repeatable");
  serve->add_option("--scores", sv_tables, "NAME=SCORES.jsonl, repeatable");
  serve->add_option("--registry", sv_registry, "Directory of registered score tables");
  serve->add_option("--host", sv_host)->capture_default_str();
  serve->add_option("--port", sv_port)->capture_default_str();
  serve->add_option("--log-dir", sv_log_dir, "Session event logs")->capture_default_str();
  serve->add_option("--ui-dir", sv_ui_dir, "Static UI bundle served at /")->check(CLI::ExistingDirectory);
  add_field(serve, sv_field);

  // score-file
  std::string sf_in, sf_name, sf_registry;
  auto* score_file = app.add_subcommand("score-file", "Validate and register an external score table");
  score_file->add_option("--in", sf_in, "JSON Lines {id, score}")->required()->check(CLI::ExistingFile);
  score_file->add_option("--name", sf_name, "Scorer name (e.g. roberta-external)")->required();
  score_file->add_option("--registry", sf_registry, "Registry directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest) {
      const auto docs = load(ingest_corpus);
      std::size_t weekend = 0, undated = 0;
      for (const auto& d : docs) {
        if (!d.date) ++undated;
        else if (is_weekend(*d.date)) ++weekend;
      }
      std::cout << "corpus: " << corpus_id_of(ingest_corpus) << "\n"
                << "documents: " << docs.size() << "\n"
                << "weekend: " << weekend << "\n"
                << "undated: " << undated << "\n";
      if (ingest_labeled) {
        std::size_t front = 0;
        for (const auto& d : derive_labels(docs)) front += d.label;
        std::cout << "front_page: " << front << "\n" << "other: " << docs.size() - front << "\n";
      }
    } else if (*build_vocab_cmd) {
      const auto docs = plain(training_docs(bv_corpus, bv_split, bv_sample));
      bv_vocab.config.field = parse_text_field(bv_vocab.field);
      const auto vocab = build_vocab(docs, bv_vocab.config, read_stopwords(bv_vocab.stopwords));
      vocab.save(bv_out);
      std::cout << "terms: " << vocab.size() << " (from " << docs.size() << " documents)\n"
                << "vocab_hash: " << vocab.hash() << "\n";
    } else if (*mine) {
      const auto docs = training_docs(ms_corpus, ms_split, ms_sample);
      StopwordMiningConfig config;
      config.rounds = ms_rounds;
      config.top_k = ms_top_k;
      config.vocab = ms_vocab.config;
      config.vocab.field = parse_text_field(ms_vocab.field);
      config.logreg.seed = ms_sample.seed;
      config.initial = read_stopwords(ms_vocab.stopwords);
      StopwordReview review = always_confirm;
      if (!ms_auto) {
        review = [](const std::string& term, double coef) {
          std::cerr << "'" << term << "' (coef " << format_double(coef) << ") stopword? [y/N] ";
          std::string answer;
          if (!std::getline(std::cin, answer)) return false;
          return !answer.empty() && (answer[0] == 'y' || answer[0] == 'Y');
        };
      }
      const auto words = mine_stopwords(docs, config, review);
      std::string text;
      for (const auto& w : words) text += w + "\n";
      std::ofstream(ms_out, std::ios::binary | std::ios::trunc) << text;
      std::cout << "stopwords: " << words.size() << "\n";
    } else if (*train) {
      const auto vocab = Vocabulary::load(tr_vocab);
      const auto docs = training_docs(tr_corpus, tr_split, tr_sample);
      const auto examples = make_examples(docs, vocab, parse_text_field(tr_field));
      std::string text;
      double initial = 0, final_loss = 0;
      if (tr_family == "logreg") {
        lr_config.seed = tr_sample.seed;
        if (tr_epochs) lr_config.epochs = *tr_epochs;
        if (tr_lr) lr_config.learning_rate = *tr_lr;
        if (tr_batch) lr_config.batch_size = *tr_batch;
        const auto model = train_logreg(examples, vocab, lr_config);
        text = model.to_json();
        initial = model.train_meta.initial_loss;
        final_loss = model.train_meta.final_loss;
      } else {
        eb_config.seed = tr_sample.seed;
        if (tr_epochs) eb_config.epochs = *tr_epochs;
        if (tr_lr) eb_config.learning_rate = *tr_lr;
        if (tr_batch) eb_config.batch_size = *tr_batch;
        const auto model = train_embbag(examples, vocab, eb_config);
        text = model.to_json();
        initial = model.train_meta.initial_loss;
        final_loss = model.train_meta.final_loss;
      }
      save_text(tr_out, text);
      std::cout << "trained " << tr_family << " on " << examples.size() << " documents; loss "
                << format_double(initial) << " -> " << format_double(final_loss) << "\n";
    } else if (*eval_cmd) {
      const auto scorer = make_scorer(ev_model, ev_vocab, ev_scores);
      const auto docs = select(load(ev_corpus), ev_split, Part::test);
      const auto field = parse_text_field(ev_field);
      std::vector<double> scores;
      std::vector<int> labels;
      for (const auto& d : docs) {
        scores.push_back(scorer->score(d.document, field));
        labels.push_back(d.label);
      }
      const auto report = evaluate(scores, labels, scorer->name(), corpus_id_of(ev_corpus));
      char line[128];
      std::snprintf(line, sizeof line, "AUC: %.4f (n_pos=%zu, n_neg=%zu)", report.auc,
                    report.n_pos, report.n_neg);
      std::cout << line << "\n";
      if (ev_brute) {
        const double brute = auc_brute_force(scores, labels);
        if (brute != report.auc)
          throw NumericError("brute-force AUC " + format_double(brute) + " != fast AUC " +
                             format_double(report.auc));
        std::cout << "brute-force AUC: match\n";
      }
    } else if (*rank) {
      const auto scorer = make_scorer(rk_model, rk_vocab, rk_scores);
      const auto docs = load(rk_corpus);
      auto list = rank_documents(docs, *scorer, parse_text_field(rk_field));
      list.corpus_id = corpus_id_of(rk_corpus);
      save_text(rk_out, ranked_list_jsonl(list, rk_top));
      std::cout << "ranked " << list.entries.size() << " documents\n";
    } else if (*kl) {
      std::vector<std::pair<std::string, std::vector<Document>>> corpora;
      for (const auto& spec : kl_corpora) {
        auto [id, path] = split_assignment(spec, "--corpus");
        corpora.emplace_back(id, load_corpus(path, id));
      }
      const auto csv = kl_matrix_csv(kl_matrix(corpora, kl_smoothing, kl_max_vocab));
      if (kl_out.empty()) std::cout << csv;
      else save_text(kl_out, csv);
    } else if (*coeffs) {
      const auto vocab = Vocabulary::load(cf_vocab);
      const auto model = LinearModel::from_json(read_text(cf_model));
      const auto report = top_coefficients(model, vocab, cf_k, fs::path(cf_model).stem().string());
      std::cout << format_coefficient_table(report);
      if (!cf_csv.empty()) {
        save_text(cf_csv + ".positive.csv", coefficients_csv(report.positive));
        save_text(cf_csv + ".negative.csv", coefficients_csv(report.negative));
      }
    } else if (*serve) {
      AnnotationStore store(sv_log_dir);
      const auto field = parse_text_field(sv_field);
      for (const auto& spec : sv_corpora) {
        auto [id, path] = split_assignment(spec, "--corpus");
        store.register_corpus(id, load_corpus(path, id));
      }
      for (const auto& spec : sv_scorers) {
        auto [name, files] = split_assignment(spec, "--scorer");
        const auto comma = files.find(',');
        if (comma == std::string::npos)
          throw ConfigError("--scorer: expected NAME=MODEL.json,VOCAB.json");
        store.register_scorer(load_model_scorer(files.substr(0, comma),
                                                Vocabulary::load(files.substr(comma + 1)), name),
                              field);
      }
      for (const auto& spec : sv_tables) {
        auto [name, path] = split_assignment(spec, "--scores");
        store.register_scorer(std::make_shared<TableScorer>(load_external_scores(path, name)));
      }
      if (!sv_registry.empty() && fs::is_directory(sv_registry)) {
        for (const auto& e : fs::directory_iterator(sv_registry)) {
          const auto file = e.path().filename().string();
          const std::string suffix = ".scores.jsonl";
          if (file.size() <= suffix.size() || !file.ends_with(suffix)) continue;
          store.register_scorer(std::make_shared<TableScorer>(
              load_external_scores(e.path(), file.substr(0, file.size() - suffix.size()))));
        }
      }
      const auto restored = store.restore();
      AnnotationServer server(store, sv_ui_dir.empty() ? std::nullopt
                                                       : std::optional<fs::path>(sv_ui_dir));
      const int port = server.bind(sv_host, sv_port);
      if (port < 0) throw ConfigError("cannot bind " + sv_host);
      std::cout << "restored " << restored << " sessions; listening on http://" << sv_host << ":"
                << port << "\n"
                << std::flush;
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      server.listen();
      g_server = nullptr;
    } else if (*score_file) {
      const auto table = load_external_scores(sf_in, sf_name);
      fs::create_directories(sf_registry);
      const auto dest = fs::path(sf_registry) / (sf_name + ".scores.jsonl");
      write_score_table(dest, table);
      std::cout << "registered " << table.scores.size() << " scores as '" << sf_name << "' -> "
                << dest.string() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace newsrank::cli
