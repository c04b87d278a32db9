#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>

#include "newsrank/corpus.hpp"
#include "newsrank/models.hpp"
#include "newsrank/text.hpp"

namespace newsrank {

/// Asked once per surfaced term; returning true adds the term to the
/// stopword set.
using StopwordReview = std::function<bool(const std::string& term, double coefficient)>;

struct StopwordMiningConfig {
  int rounds = 3;
  std::size_t top_k = 20;
  VocabConfig vocab;
  LogRegConfig logreg;
  std::set<std::string> initial;  // seed list, kept in the result
};

struct CoefficientCandidate {
  std::string term;
  double coefficient;
};

/// The top_k vocabulary terms by |coefficient|, ties broken lexicographically.
std::vector<CoefficientCandidate> top_abs_coefficients(const LinearModel& model,
                                                       const Vocabulary& vocab,
                                                       std::size_t top_k);

/// Train logistic regression, surface the strongest terms for review,
/// exclude confirmed ones, rebuild the vocabulary, repeat. Returns the
/// accumulated stopword set.
std::set<std::string> mine_stopwords(std::span<const LabeledDocument> docs,
                                     const StopwordMiningConfig& config,
                                     const StopwordReview& review);

inline bool always_confirm(const std::string&, double) { return true; }
inline bool never_confirm(const std::string&, double) { return false; }

}  // namespace newsrank
