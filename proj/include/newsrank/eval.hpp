#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newsrank/corpus.hpp"
#include "newsrank/models.hpp"
#include "newsrank/text.hpp"

namespace newsrank {

/// Area under the ROC curve via midranks: P(s+ > s-) + 1/2 P(s+ = s-).
/// O(n log n). Throws DataError("AUC undefined") unless both classes occur.
double auc(std::span<const double> scores, std::span<const int> labels);

/// O(n^2) pair count of the same quantity.
double auc_brute_force(std::span<const double> scores, std::span<const int> labels);

struct EvalReport {
  double auc = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::string model_name;
  std::string dataset_name;
};

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    std::string model_name, std::string dataset_name);

/// Sum p ln(p/q) in nats. Both distributions must share their term list.
double kl_divergence(const UnigramDistribution& p, const UnigramDistribution& q);

inline constexpr std::size_t kMaxKlVocab = 50000;

struct KLMatrix {
  std::vector<std::string> corpus_ids;
  std::vector<std::vector<double>> values;  // values[i][j] = KL(p_i || p_j)
};

/// Union unigram vocabulary (capped at the max_vocab most frequent terms),
/// every corpus smoothed over it, KL in both directions.
KLMatrix kl_matrix(const std::vector<std::pair<std::string, std::vector<Document>>>& corpora,
                   double smoothing = 0.5, std::size_t max_vocab = kMaxKlVocab);

std::string kl_matrix_csv(const KLMatrix& m);

struct RankedEntry {
  std::string id;
  double score = 0.0;
  std::string title;
};

/// Score-descending, ties by id ascending.
struct RankedList {
  std::vector<RankedEntry> entries;
  std::string model_name;
  std::string corpus_id;
};

RankedList rank_documents(std::span<const Document> docs, const Scorer& scorer,
                          TextField field = TextField::body);

/// JSON Lines {rank, id, score, title}; rank starts at 1. limit 0 = all.
std::string ranked_list_jsonl(const RankedList& list, std::size_t limit = 0);

/// AUC of the ranked scores against 0/1 ratings, restricted to rated ids.
EvalReport evaluate_annotations(const RankedList& ranked, const std::map<std::string, int>& ratings,
                                std::string dataset_name = {});

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace newsrank
