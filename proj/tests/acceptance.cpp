// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "newsrank/annotation.hpp"
#include "newsrank/annotation_server.hpp"
#include "newsrank/cli.hpp"
#include "newsrank/corpus.hpp"
#include "newsrank/eval.hpp"
#include "newsrank/models.hpp"
#include "newsrank/random.hpp"
#include "newsrank/stopwords.hpp"
#include "newsrank/text.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace newsrank;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "newsrank_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<Document> plain(const std::vector<LabeledDocument>& docs) {
  std::vector<Document> out;
  for (const auto& d : docs) out.push_back(d.document);
  return out;
}

const SplitSpec kSplit{{Date{std::chrono::year{1987}, std::chrono::January, std::chrono::day{1}},
                        Date{std::chrono::year{2005}, std::chrono::January, std::chrono::day{1}}},
                       {Date{std::chrono::year{2005}, std::chrono::January, std::chrono::day{1}},
                        Date{std::chrono::year{2008}, std::chrono::January, std::chrono::day{1}}},
                       true};

struct Pipeline {
  Vocabulary vocab;
  LinearModel model;
  double held_out_auc;
  std::size_t planted_in_top20;
  testing::RecordsCorpus records;
};

/// balance -> vocab -> logreg -> evaluate and rank.
Pipeline run_pipeline() {
  const auto split = apply_split(derive_labels(testing::make_newspaper({})), kSplit);
  const auto train = balanced_sample(split.train, 45000, 7);
  auto vocab = build_vocab(plain(train), VocabConfig{}, {});
  LogRegConfig cfg;
  cfg.seed = 7;
  auto model = train_logreg(make_examples(train, vocab), vocab, cfg);
  LinearScorer scorer("logreg", model, vocab);

  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& d : split.test) {
    scores.push_back(scorer.score(d.document, TextField::body));
    labels.push_back(d.label);
  }
  auto records = testing::make_records(1000, 10, 11);
  const auto ranked = rank_documents(records.docs, scorer, TextField::body);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < 20; ++i) hits += records.planted.contains(ranked.entries[i].id);
  return {std::move(vocab), std::move(model), auc(scores, labels), hits, std::move(records)};
}

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  double min_tie_share = 1.0;
  for (int inst = 0; inst < 1000; ++inst) {
    const std::size_t n = 2 + rng.below(199);
    const std::uint64_t levels = std::max<std::uint64_t>(1, n / 4);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
      labels[i] = static_cast<int>(rng.below(2));
    }
    labels[0] = 1;
    labels[1] = 0;
    std::map<double, int> counts;
    for (double s : scores) ++counts[s];
    std::size_t tied = 0;
    for (double s : scores) tied += counts[s] > 1;
    min_tie_share = std::min(min_tie_share, static_cast<double>(tied) / static_cast<double>(n));
    if (auc(scores, labels) != testing::pairwise_auc(scores, labels))
      return {false, fmt("instance %d (n=%zu) differs", inst, n)};
  }
  const double secs = seconds_since(t0);
  return {min_tie_share >= 0.3 && secs < 10.0,
          fmt("1000 instances exact, min tie share %.2f, %.2fs", min_tie_share, secs)};
}

Outcome planted_end_to_end() {
  const auto t0 = Clock::now();
  const auto p = run_pipeline();
  const double secs = seconds_since(t0);
  return {p.planted_in_top20 >= 9 && p.held_out_auc > 0.95 && secs < 120.0,
          fmt("%zu/10 planted in top 20 of 1000, held-out AUC %.4f, %.2fs", p.planted_in_top20,
              p.held_out_auc, secs)};
}

Outcome gradient_check() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
    worst = std::max(worst, testing::max_gradient_error(seed));
  return {worst < 1e-3, fmt("20 instances, max relative error %.2e", worst)};
}

Outcome stopword_leak() {
  testing::NewspaperOptions o;
  o.leak_token = "zzleak";
  const auto docs = balanced_sample(derive_labels(testing::make_newspaper(o)), 45000, 3);
  StopwordMiningConfig cfg;
  cfg.rounds = 1;
  cfg.logreg.seed = 3;
  const auto words = mine_stopwords(docs, cfg, always_confirm);
  const auto rebuilt = build_vocab(plain(docs), cfg.vocab, words);
  const bool mined = words.contains("zzleak");
  const bool absent = !rebuilt.lookup("zzleak").has_value();
  return {mined && absent, fmt("mined after round 1: %s, absent from rebuilt vocab: %s",
                               mined ? "yes" : "no", absent ? "yes" : "no")};
}

UnigramDistribution smoothed(Rng& rng, std::size_t k) {
  UnigramDistribution d;
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    d.terms.push_back("t" + std::to_string(i));
    d.probs.push_back(static_cast<double>(rng.below(20)) + 0.5);
    total += d.probs.back();
  }
  for (double& p : d.probs) p /= total;
  return d;
}

Outcome kl_properties() {
  Rng rng(99);
  double worst_self = 0, min_kl = 1e300;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 2 + rng.below(30);
    const auto p = smoothed(rng, k), q = smoothed(rng, k);
    worst_self = std::max(worst_self, std::abs(kl_divergence(p, p)));
    min_kl = std::min(min_kl, kl_divergence(p, q));
  }
  UnigramDistribution p{{"a", "b"}, {0.5, 0.5}, 0}, q{{"a", "b"}, {0.25, 0.75}, 0};
  const double hand = kl_divergence(p, q);

  std::vector<std::pair<std::string, std::vector<Document>>> corpora;
  testing::NewspaperOptions o;
  o.n_docs = 300;
  corpora.emplace_back("news", testing::make_newspaper(o));
  corpora.emplace_back("records", testing::make_records(300, 5, 1).docs);
  o.seed = 5;
  o.filler_vocab = 400;
  corpora.emplace_back("other", testing::make_newspaper(o));
  const auto m = kl_matrix(corpora);
  bool diag = true;
  for (std::size_t i = 0; i < m.values.size(); ++i) diag = diag && m.values[i][i] == 0.0;

  const bool pass = worst_self == 0.0 && min_kl >= 0.0 && std::abs(hand - 0.14384) <= 1e-5 && diag;
  return {pass, fmt("kl(p,p) max %.1e, min kl %.3e over 1000 pairs, hand %.6f, diagonal zero: %s",
                    worst_self, min_kl, hand, diag ? "yes" : "no")};
}

int cli_quiet(const std::vector<std::string>& args) {
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  auto* old_err = std::cerr.rdbuf(sink.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old);
  std::cerr.rdbuf(old_err);
  return code;
}

Outcome determinism() {
  const auto base = scratch("determinism");
  testing::NewspaperOptions o;
  o.n_docs = 1500;
  o.leak_token = "zzleak";
  write_corpus(base / "news.jsonl", testing::make_newspaper(o));
  write_corpus(base / "records.jsonl", testing::make_records(500, 5, 2).docs);

  auto artifacts = [&](const std::string& tag) -> std::vector<std::string> {
    const auto dir = base / tag;
    fs::create_directories(dir);
    const auto in = [&](const char* f) { return (base / f).string(); };
    const auto out = [&](const char* f) { return (dir / f).string(); };
    int rc = 0;
    rc |= cli_quiet({"mine-stopwords", "--corpus", in("news.jsonl"), "--seed", "21", "--rounds", "2",
                     "--top-k", "5", "--auto-confirm", "--out", out("stop.txt")});
    rc |= cli_quiet({"build-vocab", "--corpus", in("news.jsonl"), "--seed", "21", "--stopwords",
                     out("stop.txt"), "--out", out("vocab.json")});
    rc |= cli_quiet({"train", "--corpus", in("news.jsonl"), "--seed", "21", "--vocab",
                     out("vocab.json"), "--out", out("logreg.json")});
    rc |= cli_quiet({"train", "--corpus", in("news.jsonl"), "--seed", "21", "--vocab",
                     out("vocab.json"), "--family", "embbag", "--dim", "8", "--out",
                     out("embbag.json")});
    rc |= cli_quiet({"rank", "--corpus", in("records.jsonl"), "--model", out("logreg.json"),
                     "--vocab", out("vocab.json"), "--out", out("ranked.jsonl")});
    if (rc != 0) return {};

    AnnotationStore store(dir / "sessions", [] { return std::string("2026-01-01T00:00:00Z"); });
    store.register_corpus("records", load_corpus(in("records.jsonl"), "records"));
    store.register_scorer(load_model_scorer(out("logreg.json"), Vocabulary::load(out("vocab.json")),
                                            "logreg"));
    const auto s = store.create_session("records", 50, 8, {"logreg"});
    std::vector<std::string> files;
    for (const char* f : {"stop.txt", "vocab.json", "logreg.json", "embbag.json", "ranked.jsonl"})
      files.push_back(read_text(dir / f));
    files.push_back(read_text(store.log_path(s.session_id)));
    return files;
  };
  const auto a = artifacts("run1"), b = artifacts("run2");
  if (a.empty() || b.empty()) return {false, "a CLI step failed"};
  return {a == b, fmt("%zu artifacts (stopwords, vocab, logreg, embbag, ranking, session log) %s",
                      a.size(), a == b ? "byte-identical" : "differ")};
}

Outcome balance_and_split() {
  Rng rng(5);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n_pos = 1 + rng.below(400), n_neg = 1 + rng.below(400);
    const std::size_t cap = 1 + rng.below(500);
    std::vector<LabeledDocument> docs;
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
      LabeledDocument d;
      d.document.id = "d" + std::to_string(i);
      d.label = i < n_pos ? 1 : 0;
      docs.push_back(d);
    }
    rng.shuffle(std::span(docs));
    const auto sample = balanced_sample(docs, cap, static_cast<std::uint64_t>(inst));
    std::size_t pos = 0;
    for (const auto& d : sample) pos += d.label;
    const std::size_t expect = std::min({n_pos, n_neg, cap});
    if (pos != expect || sample.size() - pos != expect)
      return {false, fmt("instance %d: %zu/%zu, expected %zu each", inst, pos, sample.size() - pos,
                         expect)};
  }

  auto docs = derive_labels(testing::make_newspaper({}));
  for (std::size_t i = 0; i < docs.size(); i += 97) docs[i].document.date.reset();
  const auto split = apply_split(docs, kSplit);
  std::set<std::string> train_ids;
  for (const auto& d : split.train) {
    if (is_weekend(*d.document.date) || !kSplit.train_range.contains(*d.document.date))
      return {false, "train holds a weekend or out-of-range document"};
    train_ids.insert(d.document.id);
  }
  for (const auto& d : split.test) {
    if (is_weekend(*d.document.date) || !kSplit.test_range.contains(*d.document.date))
      return {false, "test holds a weekend or out-of-range document"};
    if (train_ids.contains(d.document.id)) return {false, "document in both train and test"};
  }
  return {split.weekend > 0,
          fmt("100 skewed instances balanced exactly; split %zu train / %zu test, %zu weekend excluded",
              split.train.size(), split.test.size(), split.weekend)};
}

/// True when every key in v (recursively) is in allowed.
bool keys_within(const json& v, const std::set<std::string>& allowed) {
  if (!v.is_object()) return true;
  for (auto& [k, child] : v.items())
    if (!allowed.contains(k) || !keys_within(child, allowed)) return false;
  return true;
}

Outcome annotation_protocol() {
  const auto p = run_pipeline();
  const auto log_dir = scratch("protocol");
  auto clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  auto setup = [&](AnnotationStore& store) {
    store.register_corpus("records", p.records.docs);
    store.register_scorer(std::make_shared<LinearScorer>("logreg", p.model, p.vocab));
  };

  AnnotationStore store(log_dir, clock);
  setup(store);
  AnnotationServer server(store);
  const int port = server.bind("127.0.0.1", 0);
  std::thread thread([&] { server.listen(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  const std::set<std::string> blind = {"session_id", "corpus_id", "sample_size", "progress",
                                       "rated",      "total",     "doc_id",      "title",
                                       "body",       "done"};
  std::size_t responses = 0;
  bool blind_ok = true;
  auto call = [&](httplib::Result res) {
    if (!res) throw std::runtime_error("no HTTP response");
    const auto j = json::parse(res->body);
    ++responses;
    blind_ok = blind_ok && keys_within(j, blind);
    return std::make_pair(res->status, j);
  };

  Outcome outcome{false, ""};
  try {
    const json request = {{"corpus_id", "records"}, {"sample_size", 100}, {"seed", 42},
                          {"scorers", {"logreg"}}};
    auto [code, created] = call(client.Post("/sessions", request.dump(), "application/json"));
    if (code != 201) throw std::runtime_error("create returned " + std::to_string(code));
    const auto id = created.at("session_id").get<std::string>();

    std::map<std::string, int> ratings;
    for (;;) {
      auto [c, task] = call(client.Get("/sessions/" + id + "/next"));
      if (task.contains("done")) break;
      const auto doc = task.at("doc_id").get<std::string>();
      // Scripted annotator: planted records plus a hash-chosen quarter of the rest.
      const int value = p.records.planted.contains(doc) || fnv1a64(doc) % 4 == 0 ? 1 : 0;
      ratings[doc] = value;
      auto [cr, ack] = call(client.Post("/sessions/" + id + "/ratings",
                                        json{{"doc_id", doc}, {"value", value}}.dump(),
                                        "application/json"));
      if (cr != 200) throw std::runtime_error("rating returned " + std::to_string(cr));
    }
    auto report_res = client.Get("/sessions/" + id + "/report");
    if (!report_res || report_res->status != 200) throw std::runtime_error("report failed");
    const auto report = json::parse(report_res->body);

    const auto session = store.session(id);
    std::vector<double> hidden;
    std::vector<int> labels;
    for (const auto& doc : session.doc_ids) {
      hidden.push_back(session.hidden_scores.at("logreg").at(doc));
      labels.push_back(ratings.at(doc));
    }
    const double brute = testing::pairwise_auc(hidden, labels);
    const double served = report.at("reports")[0].at("auc").get<double>();

    AnnotationStore replay(log_dir, clock);
    setup(replay);
    replay.restore();
    const bool same = replay.session_report_json(id) == report_res->body;

    outcome = {ratings.size() == 100 && blind_ok && served == brute && same,
               fmt("%zu ratings, %zu responses blind: %s, report AUC %.4f vs brute force %.4f, "
                   "replay identical: %s",
                   ratings.size(), responses, blind_ok ? "yes" : "no", served, brute,
                   same ? "yes" : "no")};
  } catch (const std::exception& e) {
    outcome = {false, e.what()};
  }
  server.stop();
  thread.join();
  return outcome;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"auc-oracle-equivalence", auc_oracle},
      {"planted-signal-end-to-end", planted_end_to_end},
      {"embedding-bag-gradient-check", gradient_check},
      {"stopword-leak-removal", stopword_leak},
      {"kl-properties", kl_properties},
      {"determinism", determinism},
      {"balance-split-invariants", balance_and_split},
      {"annotation-protocol", annotation_protocol},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
