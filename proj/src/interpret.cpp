#include "newsrank/interpret.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>

#include "newsrank/error.hpp"
#include "newsrank/eval.hpp"

namespace newsrank {

CoefficientReport top_coefficients(const LinearModel& model, const Vocabulary& vocab,
                                   std::size_t k, std::string model_name) {
  if (k == 0) throw ConfigError("k must be >= 1");
  if (model.vocab_hash != vocab.hash() || model.weights.size() != vocab.size())
    throw DataError("model was trained on a different vocabulary");

  CoefficientReport report;
  report.model_name = std::move(model_name);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double w = model.weights[i];
    if (w > 0) report.positive.emplace_back(vocab.term(i), w);
    else if (w < 0) report.negative.emplace_back(vocab.term(i), w);
  }
  auto take = [k](auto& side, auto better) {
    const auto n = std::min(k, side.size());
    std::partial_sort(side.begin(), side.begin() + static_cast<std::ptrdiff_t>(n), side.end(),
                      [&](const auto& a, const auto& b) {
                        return a.second != b.second ? better(a.second, b.second) : a.first < b.first;
                      });
    side.resize(n);
  };
  take(report.positive, std::greater<double>{});
  take(report.negative, std::less<double>{});
  return report;
}

std::string coefficients_csv(const std::vector<std::pair<std::string, double>>& side) {
  std::string out = "term,coefficient\n";
  for (const auto& [term, coef] : side) out += term + "," + format_double(coef) + "\n";
  return out;
}

std::string format_coefficient_table(const CoefficientReport& report) {
  std::size_t width = 14;
  for (const auto& [t, c] : report.positive) width = std::max(width, t.size());
  for (const auto& [t, c] : report.negative) width = std::max(width, t.size());

  std::string out;
  char line[512];
  width = std::min<std::size_t>(width, 200);
  const int w = static_cast<int>(width);
  std::snprintf(line, sizeof line, "%-*s %8s | %-*s %8s\n", w, "Top Pos. Coef.", "beta", w,
                "Top Neg. Coef.", "beta");
  out += line;
  out += std::string(width + 9, '-') + "-+-" + std::string(width + 9, '-') + "\n";
  const auto rows = std::max(report.positive.size(), report.negative.size());
  for (std::size_t i = 0; i < rows; ++i) {
    const bool hp = i < report.positive.size(), hn = i < report.negative.size();
    char pos[16] = "", neg[16] = "";
    if (hp) std::snprintf(pos, sizeof pos, "%.3f", report.positive[i].second);
    if (hn) std::snprintf(neg, sizeof neg, "%.3f", report.negative[i].second);
    std::snprintf(line, sizeof line, "%-*s %8s | %-*s %8s\n", w,
                  hp ? report.positive[i].first.substr(0, 200).c_str() : "", pos, w,
                  hn ? report.negative[i].first.substr(0, 200).c_str() : "", neg);
    out += line;
  }
  return out;
}

}  // namespace newsrank
