#include "newsrank/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"

namespace newsrank {

using nlohmann::json;

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double cross_entropy(double margin, int label) {
  return label == 1 ? softplus(-margin) : softplus(margin);
}

void check_training_data(std::span<const Example> data, std::size_t n_features) {
  bool pos = false, neg = false;
  for (const auto& ex : data) {
    if (ex.label != 0 && ex.label != 1) throw DataError("labels must be 0 or 1");
    (ex.label == 1 ? pos : neg) = true;
    for (const auto& e : ex.x.entries) {
      if (e.index >= n_features)
        throw DataError("feature index " + std::to_string(e.index) + " out of range");
      if (!std::isfinite(e.weight)) throw DataError("non-finite feature weight");
    }
  }
  if (!pos || !neg) throw DataError("training data must contain both classes");
}

nlohmann::ordered_json meta_to_json(const TrainMeta& m) {
  return nlohmann::ordered_json{{"seed", m.seed},
              {"epochs", m.epochs},
              {"learning_rate", m.learning_rate},
              {"batch_size", m.batch_size},
              {"initial_loss", m.initial_loss},
              {"final_loss", m.final_loss}};
}

TrainMeta meta_from_json(const json& j) {
  TrainMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.epochs = j.at("epochs").get<int>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.batch_size = j.at("batch_size").get<std::size_t>();
  m.initial_loss = j.at("initial_loss").get<double>();
  m.final_loss = j.at("final_loss").get<double>();
  return m;
}

json parse_model(std::string_view text, std::string_view family) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  }
  if (obj.value("family", "") != family)
    throw DataError("expected a '" + std::string(family) + "' model");
  if (obj.value("version", 0) != 1) throw DataError("unsupported model version");
  return obj;
}

std::vector<std::size_t> iota_order(std::size_t n) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return order;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------- logistic

std::string LinearModel::to_json() const {
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  obj["version"] = kVersion;
  obj["family"] = "logreg";
  obj["vocab_hash"] = vocab_hash;
  obj["l2"] = l2;
  obj["bias"] = bias;
  obj["weights"] = weights;
  obj["train_meta"] = meta_to_json(train_meta);
  return obj.dump();
}

LinearModel LinearModel::from_json(std::string_view text) {
  const json obj = parse_model(text, "logreg");
  try {
    LinearModel m;
    m.vocab_hash = obj.at("vocab_hash").get<std::string>();
    m.l2 = obj.at("l2").get<double>();
    m.bias = obj.at("bias").get<double>();
    m.weights = obj.at("weights").get<std::vector<double>>();
    m.train_meta = meta_from_json(obj.at("train_meta"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed logreg model: ") + e.what());
  }
}

static double margin(const LinearModel& model, const SparseVector& vec) {
  double z = model.bias;
  for (const auto& e : vec.entries) {
    if (e.index >= model.weights.size())
      throw DataError("feature index " + std::to_string(e.index) + " out of range for model");
    z += model.weights[e.index] * e.weight;
  }
  return z;
}

double logreg_loss(const LinearModel& model, std::span<const Example> data) {
  double loss = 0.0;
  for (const auto& ex : data) loss += cross_entropy(margin(model, ex.x), ex.label);
  return data.empty() ? 0.0 : loss / static_cast<double>(data.size());
}

static double logreg_objective(const LinearModel& model, std::span<const Example> data) {
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return logreg_loss(model, data) + 0.5 * model.l2 * sq;
}

LinearModel train_logreg(std::span<const Example> data, std::size_t n_features,
                         const LogRegConfig& config) {
  if (config.epochs < 0 || config.batch_size == 0 || !(config.learning_rate > 0) ||
      !(config.l2 >= 0))
    throw ConfigError("invalid logistic-regression configuration");
  check_training_data(data, n_features);

  LinearModel model;
  model.weights.assign(n_features, 0.0);
  model.l2 = config.l2;
  model.train_meta = {config.seed, config.epochs, config.learning_rate, config.batch_size, 0, 0};
  model.train_meta.initial_loss = logreg_objective(model, data);

  Rng rng(config.seed);
  auto order = iota_order(data.size());
  std::vector<double> residual;
  const double decay = 1.0 - config.learning_rate * config.l2;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double step = config.learning_rate / static_cast<double>(end - start);

      residual.clear();
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = data[order[k]];
        residual.push_back(sigmoid(margin(model, ex.x)) - ex.label);
      }
      if (config.l2 > 0)
        for (double& w : model.weights) w *= decay;
      double bias_grad = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const double r = residual[k - start];
        for (const auto& e : data[order[k]].x.entries) model.weights[e.index] -= step * r * e.weight;
        bias_grad += r;
      }
      model.bias -= step * bias_grad;
    }
    const double loss = logreg_objective(model, data);
    if (!std::isfinite(loss))
      throw NumericError("logistic regression diverged at epoch " + std::to_string(epoch));
    model.train_meta.final_loss = loss;
  }
  if (config.epochs == 0) model.train_meta.final_loss = model.train_meta.initial_loss;
  return model;
}

LinearModel train_logreg(std::span<const Example> data, const Vocabulary& vocab,
                         const LogRegConfig& config) {
  auto model = train_logreg(data, vocab.size(), config);
  model.vocab_hash = vocab.hash();
  return model;
}

double predict_linear(const LinearModel& model, const SparseVector& vec) {
  return sigmoid(margin(model, vec));
}

// ---------------------------------------------------------- embedding bag

std::string EmbeddingBagModel::to_json() const {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < n_terms(); ++i) {
    auto row = embedding(i);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  obj["version"] = kVersion;
  obj["family"] = "embbag";
  obj["vocab_hash"] = vocab_hash;
  obj["dim"] = dim;
  obj["output_bias"] = output_bias;
  obj["output_weights"] = output_weights;
  obj["embeddings"] = std::move(rows);
  obj["train_meta"] = meta_to_json(train_meta);
  return obj.dump();
}

EmbeddingBagModel EmbeddingBagModel::from_json(std::string_view text) {
  const json obj = parse_model(text, "embbag");
  try {
    EmbeddingBagModel m;
    m.vocab_hash = obj.at("vocab_hash").get<std::string>();
    m.dim = obj.at("dim").get<std::size_t>();
    m.output_bias = obj.at("output_bias").get<double>();
    m.output_weights = obj.at("output_weights").get<std::vector<double>>();
    if (m.output_weights.size() != m.dim) throw DataError("output_weights length != dim");
    for (const auto& row : obj.at("embeddings")) {
      auto values = row.get<std::vector<double>>();
      if (values.size() != m.dim) throw DataError("embedding row length != dim");
      m.embeddings.insert(m.embeddings.end(), values.begin(), values.end());
    }
    m.train_meta = meta_from_json(obj.at("train_meta"));
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed embbag model: ") + e.what());
  }
}

std::vector<double> embbag_hidden(const EmbeddingBagModel& model, const SparseVector& vec) {
  std::vector<double> h(model.dim, 0.0);
  double total = 0.0;
  for (const auto& e : vec.entries) {
    if (e.index >= model.n_terms())
      throw DataError("feature index " + std::to_string(e.index) + " out of range for model");
    auto row = model.embedding(e.index);
    for (std::size_t d = 0; d < model.dim; ++d) h[d] += e.weight * row[d];
    total += e.weight;
  }
  if (total > 0)
    for (double& v : h) v /= total;
  else
    std::fill(h.begin(), h.end(), 0.0);
  return h;
}

static double embbag_margin(const EmbeddingBagModel& model, const std::vector<double>& h) {
  double z = model.output_bias;
  for (std::size_t d = 0; d < model.dim; ++d) z += model.output_weights[d] * h[d];
  return z;
}

double predict_embbag(const EmbeddingBagModel& model, const SparseVector& vec) {
  return sigmoid(embbag_margin(model, embbag_hidden(model, vec)));
}

double embbag_loss(const EmbeddingBagModel& model, std::span<const Example> data) {
  double loss = 0.0;
  for (const auto& ex : data)
    loss += cross_entropy(embbag_margin(model, embbag_hidden(model, ex.x)), ex.label);
  return data.empty() ? 0.0 : loss / static_cast<double>(data.size());
}

EmbBagGradient embbag_gradient(const EmbeddingBagModel& model, std::span<const Example> batch) {
  EmbBagGradient grad;
  grad.output_weights.assign(model.dim, 0.0);
  if (batch.empty()) return grad;

  std::map<std::size_t, std::vector<double>> rows;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const auto h = embbag_hidden(model, ex.x);
    const double z = embbag_margin(model, h);
    grad.loss += cross_entropy(z, ex.label) * inv_n;
    const double g = (sigmoid(z) - ex.label) * inv_n;

    for (std::size_t d = 0; d < model.dim; ++d) grad.output_weights[d] += g * h[d];
    grad.output_bias += g;

    double total = 0.0;
    for (const auto& e : ex.x.entries) total += e.weight;
    if (!(total > 0)) continue;
    for (const auto& e : ex.x.entries) {
      auto& row = rows[e.index];
      if (row.empty()) row.assign(model.dim, 0.0);
      const double scale = g * e.weight / total;
      for (std::size_t d = 0; d < model.dim; ++d) row[d] += scale * model.output_weights[d];
    }
  }
  grad.embeddings.reserve(rows.size());
  for (auto& [idx, row] : rows) grad.embeddings.emplace_back(idx, std::move(row));
  return grad;
}

EmbeddingBagModel init_embbag(std::size_t n_features, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embedding dim must be positive");
  EmbeddingBagModel model;
  model.dim = dim;
  model.embeddings.resize(n_features * dim);
  model.output_weights.assign(dim, 0.0);
  Rng rng(seed);
  const double bound = 1.0 / static_cast<double>(dim);
  for (double& v : model.embeddings) v = rng.uniform(-bound, bound);
  return model;
}

EmbeddingBagModel train_embbag(std::span<const Example> data, std::size_t n_features,
                               const EmbBagConfig& config) {
  if (config.dim < 2) throw ConfigError("embedding dim must be >= 2");
  if (config.epochs < 0 || config.batch_size == 0 || !(config.learning_rate > 0))
    throw ConfigError("invalid embedding-bag configuration");
  check_training_data(data, n_features);

  auto model = init_embbag(n_features, config.dim, config.seed);
  model.train_meta = {config.seed, config.epochs, config.learning_rate, config.batch_size, 0, 0};
  model.train_meta.initial_loss = embbag_loss(model, data);

  // Shuffling draws from a stream separate from initialization.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  auto order = iota_order(data.size());
  std::vector<Example> batch;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(data[order[k]]);
      const auto grad = embbag_gradient(model, batch);
      const double lr = config.learning_rate;
      for (std::size_t d = 0; d < model.dim; ++d) model.output_weights[d] -= lr * grad.output_weights[d];
      model.output_bias -= lr * grad.output_bias;
      for (const auto& [idx, row] : grad.embeddings) {
        auto emb = model.embedding(idx);
        for (std::size_t d = 0; d < model.dim; ++d) emb[d] -= lr * row[d];
      }
    }
    const double loss = embbag_loss(model, data);
    if (!std::isfinite(loss))
      throw NumericError("embedding-bag training diverged at epoch " + std::to_string(epoch));
    model.train_meta.final_loss = loss;
  }
  if (config.epochs == 0) model.train_meta.final_loss = model.train_meta.initial_loss;
  return model;
}

EmbeddingBagModel train_embbag(std::span<const Example> data, const Vocabulary& vocab,
                               const EmbBagConfig& config) {
  auto model = train_embbag(data, vocab.size(), config);
  model.vocab_hash = vocab.hash();
  return model;
}

std::vector<Example> make_examples(std::span<const LabeledDocument> docs, const Vocabulary& vocab,
                                   TextField field, Weighting weighting) {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({vectorize(d.document, vocab, field, weighting), d.label});
  return out;
}

// ----------------------------------------------------------- score tables

ScoreTable load_external_scores(const std::filesystem::path& path, std::string source_name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open score file " + path.string());
  ScoreTable table;
  table.source_name = source_name.empty() ? path.stem().string() : std::move(source_name);

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    std::string id;
    double score = 0.0;
    try {
      const json obj = json::parse(line);
      id = obj.at("id").get<std::string>();
      score = obj.at("score").get<double>();
    } catch (const json::exception& e) {
      throw DataError(where + "malformed score record: " + e.what());
    }
    if (!(score >= 0.0 && score <= 1.0))
      throw DataError(where + "score for id '" + id + "' outside [0,1]");
    if (!table.scores.emplace(id, score).second)
      throw DataError(where + "duplicate id '" + id + "'");
  }
  if (table.scores.empty()) std::cerr << "warning: score file " << path.string() << " is empty\n";
  return table;
}

void write_score_table(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [id, score] : table.scores) out << nlohmann::ordered_json{{"id", id}, {"score", score}}.dump() << '\n';
}

// ---------------------------------------------------------------- scorers

LinearScorer::LinearScorer(std::string name, LinearModel model, Vocabulary vocab)
    : name_(std::move(name)), model_(std::move(model)), vocab_(std::move(vocab)) {
  if (model_.vocab_hash != vocab_.hash())
    throw DataError("model '" + name_ + "' was trained on a different vocabulary");
  if (model_.weights.size() != vocab_.size())
    throw DataError("model '" + name_ + "' size does not match its vocabulary");
}

double LinearScorer::score(const Document& doc, TextField field) const {
  return predict_linear(model_, vectorize(doc, vocab_, field));
}

EmbeddingBagScorer::EmbeddingBagScorer(std::string name, EmbeddingBagModel model, Vocabulary vocab)
    : name_(std::move(name)), model_(std::move(model)), vocab_(std::move(vocab)) {
  if (model_.vocab_hash != vocab_.hash())
    throw DataError("model '" + name_ + "' was trained on a different vocabulary");
  if (model_.n_terms() != vocab_.size())
    throw DataError("model '" + name_ + "' size does not match its vocabulary");
}

double EmbeddingBagScorer::score(const Document& doc, TextField field) const {
  return predict_embbag(model_, vectorize(doc, vocab_, field));
}

TableScorer::TableScorer(ScoreTable table) : table_(std::move(table)) {}

double TableScorer::score(const Document& doc, TextField) const {
  auto it = table_.scores.find(doc.id);
  if (it == table_.scores.end())
    throw DataError("score table '" + table_.source_name + "' has no score for id '" + doc.id + "'");
  return it->second;
}

std::unique_ptr<Scorer> load_model_scorer(const std::filesystem::path& model_path,
                                          const Vocabulary& vocab, std::string name) {
  const auto text = read_text(model_path);
  std::string family;
  try {
    family = json::parse(text).value("family", "");
  } catch (const json::exception& e) {
    throw DataError("malformed model file " + model_path.string() + ": " + e.what());
  }
  if (family == "logreg")
    return std::make_unique<LinearScorer>(std::move(name), LinearModel::from_json(text), vocab);
  if (family == "embbag")
    return std::make_unique<EmbeddingBagScorer>(std::move(name), EmbeddingBagModel::from_json(text),
                                                vocab);
  throw DataError("unknown model family '" + family + "' in " + model_path.string());
}

void save_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace newsrank
