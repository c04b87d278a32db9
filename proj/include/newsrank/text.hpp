#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "newsrank/corpus.hpp"

namespace newsrank {

/// Per-document token budget applied before n-gram extraction.
inline constexpr std::size_t kMaxDocumentTokens = 5000;

enum class TextField { body, alt_text };
enum class Weighting { count, binary };

TextField parse_text_field(std::string_view name);
std::string_view to_string(TextField field);

/// Lowercased alphanumeric runs. Accented Latin letters fold to their ASCII
/// base letter; punctuation and whitespace separate tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Text the models see for a document: title + body, or the alternate
/// (event) text. Throws DataError when alt_text is requested but absent.
std::string document_text(const Document& doc, TextField field);

/// Tokens of document_text, truncated to kMaxDocumentTokens.
std::vector<std::string> document_tokens(const Document& doc, TextField field);

/// Unigrams (minus stopword tokens) followed by bigrams over the remaining
/// token sequence when ngram_max == 2. Multi-word stopwords are dropped.
std::vector<std::string> extract_ngrams(std::span<const std::string> tokens, int ngram_max,
                                        const std::set<std::string>& stopwords);

struct VocabConfig {
  double min_df = 0.01;
  double max_df = 0.5;
  std::size_t max_size = 13000;
  int ngram_max = 2;
  TextField field = TextField::body;
};

class Vocabulary {
 public:
  static constexpr int kVersion = 1;

  Vocabulary() = default;
  /// Terms are assigned indices in the given order.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint64_t> doc_freq,
             std::uint64_t n_docs, std::set<std::string> stopwords, int ngram_max,
             double min_df, double max_df);

  std::size_t size() const { return terms_.size(); }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::uint64_t>& doc_freq() const { return doc_freq_; }
  std::uint64_t n_docs() const { return n_docs_; }
  const std::set<std::string>& stopwords() const { return stopwords_; }
  int ngram_max() const { return ngram_max_; }
  double min_df() const { return min_df_; }
  double max_df() const { return max_df_; }

  std::optional<std::size_t> lookup(std::string_view term) const;
  const std::string& term(std::size_t index) const { return terms_.at(index); }

  /// Canonical serialized form; round-trips bit-exactly through from_json.
  std::string to_json() const;
  static Vocabulary from_json(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  /// Hex FNV-1a of to_json(); binds trained models to this vocabulary.
  const std::string& hash() const { return hash_; }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> doc_freq_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t n_docs_ = 0;
  std::set<std::string> stopwords_;
  int ngram_max_ = 2;
  double min_df_ = 0.0;
  double max_df_ = 1.0;
  std::string hash_;
};

Vocabulary build_vocab(std::span<const Document> docs, const VocabConfig& config,
                       const std::set<std::string>& stopwords = {});

/// Sorted (index, weight) pairs with strictly increasing indices.
struct SparseVector {
  struct Entry {
    std::size_t index;
    double weight;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

SparseVector vectorize(const Document& doc, const Vocabulary& vocab,
                       TextField field = TextField::body,
                       Weighting weighting = Weighting::count);

/// Additively smoothed unigram distribution over a shared, sorted vocabulary.
struct UnigramDistribution {
  std::vector<std::string> terms;
  std::vector<double> probs;
  double smoothing_mass = 0.0;  // share of probability contributed by smoothing
};

UnigramDistribution unigram_distribution(std::span<const Document> docs,
                                         std::span<const std::string> shared_vocab,
                                         double smoothing,
                                         TextField field = TextField::body);

}  // namespace newsrank
