#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "newsrank/corpus.hpp"
#include "newsrank/text.hpp"

namespace newsrank {

/// Numerically stable logistic function; saturates to exactly 0 or 1.
double sigmoid(double z);

struct Example {
  SparseVector x;
  int label = 0;
};

struct TrainMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  std::size_t batch_size = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct LogRegConfig {
  double l2 = 1e-4;
  int epochs = 5;
  double learning_rate = 0.1;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct LinearModel {
  static constexpr int kVersion = 1;

  std::vector<double> weights;
  double bias = 0.0;
  std::string vocab_hash;
  double l2 = 0.0;
  TrainMeta train_meta;

  std::string to_json() const;
  static LinearModel from_json(std::string_view text);
};

struct EmbBagConfig {
  std::size_t dim = 50;
  int epochs = 5;
  double learning_rate = 0.05;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

/// FastText-style classifier: weighted mean of term embeddings fed to a
/// single sigmoid output unit.
struct EmbeddingBagModel {
  static constexpr int kVersion = 1;

  std::size_t dim = 0;
  std::vector<double> embeddings;  // row-major, n_terms x dim
  std::vector<double> output_weights;
  double output_bias = 0.0;
  std::string vocab_hash;
  TrainMeta train_meta;

  std::size_t n_terms() const { return dim == 0 ? 0 : embeddings.size() / dim; }
  std::span<double> embedding(std::size_t index) {
    return std::span(embeddings).subspan(index * dim, dim);
  }
  std::span<const double> embedding(std::size_t index) const {
    return std::span(embeddings).subspan(index * dim, dim);
  }

  std::string to_json() const;
  static EmbeddingBagModel from_json(std::string_view text);
};

/// Mean binary cross-entropy of the model over data.
double logreg_loss(const LinearModel& model, std::span<const Example> data);

/// Mini-batch SGD on mean cross-entropy + (l2/2)||w||^2 from zero weights.
/// n_features fixes |weights|; vocab_hash is left empty.
LinearModel train_logreg(std::span<const Example> data, std::size_t n_features,
                         const LogRegConfig& config);
/// As above, sized for and bound to vocab.
LinearModel train_logreg(std::span<const Example> data, const Vocabulary& vocab,
                         const LogRegConfig& config);

double predict_linear(const LinearModel& model, const SparseVector& vec);

/// Gradient of the mean cross-entropy over a batch. Embedding rows only for
/// terms that occur in the batch, sorted by index.
struct EmbBagGradient {
  double loss = 0.0;
  std::vector<double> output_weights;
  double output_bias = 0.0;
  std::vector<std::pair<std::size_t, std::vector<double>>> embeddings;
};

/// Hidden state: weighted mean of the embeddings of vec's entries (zero when
/// the total weight is zero).
std::vector<double> embbag_hidden(const EmbeddingBagModel& model, const SparseVector& vec);
double embbag_loss(const EmbeddingBagModel& model, std::span<const Example> data);
EmbBagGradient embbag_gradient(const EmbeddingBagModel& model, std::span<const Example> batch);

EmbeddingBagModel init_embbag(std::size_t n_features, std::size_t dim, std::uint64_t seed);
EmbeddingBagModel train_embbag(std::span<const Example> data, std::size_t n_features,
                               const EmbBagConfig& config);
EmbeddingBagModel train_embbag(std::span<const Example> data, const Vocabulary& vocab,
                               const EmbBagConfig& config);

double predict_embbag(const EmbeddingBagModel& model, const SparseVector& vec);

/// Vectorizes labeled documents against vocab.
std::vector<Example> make_examples(std::span<const LabeledDocument> docs, const Vocabulary& vocab,
                                   TextField field = TextField::body,
                                   Weighting weighting = Weighting::count);

/// Scores produced out-of-band (e.g. a fine-tuned transformer), keyed by id.
struct ScoreTable {
  std::map<std::string, double> scores;
  std::string source_name;
};

ScoreTable load_external_scores(const std::filesystem::path& path, std::string source_name = {});
void write_score_table(const std::filesystem::path& path, const ScoreTable& table);

/// Anything that can score a document for ranking.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual const std::string& name() const = 0;
  virtual double score(const Document& doc, TextField field) const = 0;
};

class LinearScorer final : public Scorer {
 public:
  /// Throws DataError when the model was not trained on vocab.
  LinearScorer(std::string name, LinearModel model, Vocabulary vocab);
  const std::string& name() const override { return name_; }
  double score(const Document& doc, TextField field) const override;

 private:
  std::string name_;
  LinearModel model_;
  Vocabulary vocab_;
};

class EmbeddingBagScorer final : public Scorer {
 public:
  EmbeddingBagScorer(std::string name, EmbeddingBagModel model, Vocabulary vocab);
  const std::string& name() const override { return name_; }
  double score(const Document& doc, TextField field) const override;

 private:
  std::string name_;
  EmbeddingBagModel model_;
  Vocabulary vocab_;
};

class TableScorer final : public Scorer {
 public:
  explicit TableScorer(ScoreTable table);
  const std::string& name() const override { return table_.source_name; }
  /// Throws DataError naming the id when the table does not cover doc.
  double score(const Document& doc, TextField field) const override;

 private:
  ScoreTable table_;
};

/// Model file loader: dispatches on the "family" field.
std::unique_ptr<Scorer> load_model_scorer(const std::filesystem::path& model_path,
                                          const Vocabulary& vocab, std::string name);

void save_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace newsrank
