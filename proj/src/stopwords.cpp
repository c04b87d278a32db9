#include "newsrank/stopwords.hpp"

#include <algorithm>
#include <cmath>

#include "newsrank/error.hpp"

namespace newsrank {

std::vector<CoefficientCandidate> top_abs_coefficients(const LinearModel& model,
                                                       const Vocabulary& vocab,
                                                       std::size_t top_k) {
  if (model.weights.size() != vocab.size())
    throw DataError("model size does not match vocabulary");
  std::vector<CoefficientCandidate> all;
  all.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (model.weights[i] != 0.0) all.push_back({vocab.term(i), model.weights[i]});
  const auto n = std::min(top_k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const auto& a, const auto& b) {
                      const double ma = std::abs(a.coefficient), mb = std::abs(b.coefficient);
                      return ma != mb ? ma > mb : a.term < b.term;
                    });
  all.resize(n);
  return all;
}

std::set<std::string> mine_stopwords(std::span<const LabeledDocument> docs,
                                     const StopwordMiningConfig& config,
                                     const StopwordReview& review) {
  if (config.rounds < 1) throw ConfigError("stopword mining needs at least one round");
  std::vector<Document> plain;
  plain.reserve(docs.size());
  for (const auto& d : docs) plain.push_back(d.document);

  std::set<std::string> stopwords = config.initial;
  for (int round = 0; round < config.rounds; ++round) {
    const auto vocab = build_vocab(plain, config.vocab, stopwords);
    const auto examples = make_examples(docs, vocab, config.vocab.field);
    const auto model = train_logreg(examples, vocab, config.logreg);
    bool added = false;
    for (const auto& c : top_abs_coefficients(model, vocab, config.top_k)) {
      if (review(c.term, c.coefficient)) added |= stopwords.insert(c.term).second;
    }
    if (!added) break;
  }
  return stopwords;
}

}  // namespace newsrank
