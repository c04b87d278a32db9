#pragma once

// Finite-difference check of the embedding-bag gradient.

#include <algorithm>
#include <cmath>
#include <vector>

#include "newsrank/models.hpp"
#include "newsrank/random.hpp"

namespace newsrank::testing {

// Mean cross-entropy straight from predictions: the finite-difference
// target, independent of the analytic gradient code.
inline double loss_from_predictions(const EmbeddingBagModel& m, const std::vector<Example>& batch) {
  double total = 0;
  for (const auto& ex : batch) {
    const double p = predict_embbag(m, ex.x);
    total -= ex.label == 1 ? std::log(p) : std::log(1 - p);
  }
  return total / static_cast<double>(batch.size());
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

inline double max_gradient_error(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t terms = 7, dim = 2 + rng.below(4);
  auto m = init_embbag(terms, dim, seed);
  for (double& w : m.embeddings) w = rng.uniform(-1, 1);
  for (double& w : m.output_weights) w = rng.uniform(-1, 1);
  m.output_bias = rng.uniform(-0.5, 0.5);

  std::vector<Example> batch;
  for (int d = 0; d < 5; ++d) {
    SparseVector x;
    for (std::size_t t = 0; t < terms; ++t)
      if (rng.uniform() < 0.5) x.entries.push_back({t, 1.0 + static_cast<double>(rng.below(4))});
    batch.push_back({x, static_cast<int>(rng.below(2))});
  }

  const auto grad = embbag_gradient(m, batch);
  const double eps = 1e-4;
  double worst = 0;
  auto check = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + eps;
    const double up = loss_from_predictions(m, batch);
    param = saved - eps;
    const double down = loss_from_predictions(m, batch);
    param = saved;
    worst = std::max(worst, relative_error(analytic, (up - down) / (2 * eps)));
  };
  for (std::size_t d = 0; d < dim; ++d) check(m.output_weights[d], grad.output_weights[d]);
  check(m.output_bias, grad.output_bias);

  std::vector<std::vector<double>> dense(terms, std::vector<double>(dim, 0.0));
  for (const auto& [idx, row] : grad.embeddings) dense[idx] = row;
  for (std::size_t t = 0; t < terms; ++t)
    for (std::size_t d = 0; d < dim; ++d) check(m.embeddings[t * dim + d], dense[t][d]);
  return worst;
}

}  // namespace newsrank::testing
