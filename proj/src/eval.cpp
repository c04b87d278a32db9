#include "newsrank/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "newsrank/error.hpp"

namespace newsrank {

using nlohmann::json;

namespace {

std::pair<std::size_t, std::size_t> count_classes(std::span<const double> scores,
                                                  std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("scores and labels differ in length");
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) ++pos;
    else if (labels[i] == 0) ++neg;
    else throw DataError("labels must be 0 or 1");
    if (std::isnan(scores[i])) throw DataError("NaN score");
  }
  if (pos == 0 || neg == 0) throw DataError("AUC undefined: need both classes");
  return {pos, neg};
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = count_classes(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the positive rank sum, using midranks for ties, in exact integers.
  std::uint64_t twice_rank_sum = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_pos += static_cast<std::uint64_t>(labels[order[j]] == 1);
      ++j;
    }
    // Ranks i+1..j; twice their mean is i+1+j.
    twice_rank_sum += group_pos * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const std::uint64_t p = n_pos, n = n_neg;
  const std::uint64_t twice_u = twice_rank_sum - p * (p + 1);
  return static_cast<double>(twice_u) / static_cast<double>(2 * p * n);
}

double auc_brute_force(std::span<const double> scores, std::span<const int> labels) {
  const auto [n_pos, n_neg] = count_classes(scores, labels);
  std::uint64_t twice_wins = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) twice_wins += 2;
      else if (scores[i] == scores[j]) twice_wins += 1;
    }
  }
  return static_cast<double>(twice_wins) / static_cast<double>(2 * n_pos * n_neg);
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    std::string model_name, std::string dataset_name) {
  EvalReport r;
  r.auc = auc(scores, labels);
  for (int l : labels) (l == 1 ? r.n_pos : r.n_neg)++;
  r.model_name = std::move(model_name);
  r.dataset_name = std::move(dataset_name);
  return r;
}

double kl_divergence(const UnigramDistribution& p, const UnigramDistribution& q) {
  if (p.terms != q.terms || p.probs.size() != q.probs.size() || p.probs.size() != p.terms.size())
    throw DataError("KL divergence requires distributions over the same vocabulary");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    if (p.probs[i] > 0) kl += p.probs[i] * std::log(p.probs[i] / q.probs[i]);
  }
  // Rounding can leave a tiny negative sum for near-identical inputs.
  return std::max(kl, 0.0);
}

KLMatrix kl_matrix(const std::vector<std::pair<std::string, std::vector<Document>>>& corpora,
                   double smoothing, std::size_t max_vocab) {
  if (corpora.size() < 2) throw ConfigError("KL matrix needs at least two corpora");
  std::unordered_map<std::string, std::uint64_t> totals;
  for (const auto& [id, docs] : corpora) {
    if (docs.empty()) throw DataError("corpus '" + id + "' is empty");
    for (const auto& doc : docs)
      for (auto& tok : document_tokens(doc, TextField::body)) ++totals[std::move(tok)];
  }
  std::vector<std::pair<std::string, std::uint64_t>> ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > max_vocab) ranked.resize(max_vocab);
  std::vector<std::string> vocab;
  vocab.reserve(ranked.size());
  for (auto& [t, c] : ranked) vocab.push_back(std::move(t));
  std::sort(vocab.begin(), vocab.end());

  std::vector<UnigramDistribution> dists;
  KLMatrix m;
  for (const auto& [id, docs] : corpora) {
    m.corpus_ids.push_back(id);
    dists.push_back(unigram_distribution(docs, vocab, smoothing));
  }
  const auto n = dists.size();
  m.values.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) m.values[i][j] = kl_divergence(dists[i], dists[j]);
  return m;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string kl_matrix_csv(const KLMatrix& m) {
  std::string out = "corpus";
  for (const auto& id : m.corpus_ids) out += "," + id;
  out += '\n';
  for (std::size_t i = 0; i < m.corpus_ids.size(); ++i) {
    out += m.corpus_ids[i];
    for (double v : m.values[i]) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

RankedList rank_documents(std::span<const Document> docs, const Scorer& scorer, TextField field) {
  RankedList list;
  list.model_name = scorer.name();
  if (!docs.empty()) list.corpus_id = docs.front().corpus_id;
  list.entries.reserve(docs.size());
  for (const auto& doc : docs) {
    const double s = scorer.score(doc, field);
    if (std::isnan(s)) throw NumericError("scorer produced NaN for id '" + doc.id + "'");
    list.entries.push_back({doc.id, s, doc.title});
  }
  std::sort(list.entries.begin(), list.entries.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  for (std::size_t i = 1; i < list.entries.size(); ++i)
    if (list.entries[i].id == list.entries[i - 1].id)
      throw DataError("duplicate document id '" + list.entries[i].id + "' in ranking");
  return list;
}

std::string ranked_list_jsonl(const RankedList& list, std::size_t limit) {
  std::string out;
  const auto n = limit == 0 ? list.entries.size() : std::min(limit, list.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = list.entries[i];
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    obj["rank"] = i + 1;
    obj["id"] = e.id;
    obj["score"] = e.score;
    obj["title"] = e.title;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

EvalReport evaluate_annotations(const RankedList& ranked, const std::map<std::string, int>& ratings,
                                std::string dataset_name) {
  std::unordered_map<std::string_view, double> by_id;
  by_id.reserve(ranked.entries.size());
  for (const auto& e : ranked.entries) by_id.emplace(e.id, e.score);

  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& [id, value] : ratings) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("rated id '" + id + "' is not in the ranking");
    if (value != 0 && value != 1) throw DataError("rating for '" + id + "' must be 0 or 1");
    scores.push_back(it->second);
    labels.push_back(value);
  }
  if (dataset_name.empty()) dataset_name = ranked.corpus_id;
  return evaluate(scores, labels, ranked.model_name, std::move(dataset_name));
}

}  // namespace newsrank
