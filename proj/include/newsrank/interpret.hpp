#pragma once

#include <string>
#include <utility>
#include <vector>

#include "newsrank/models.hpp"
#include "newsrank/text.hpp"

namespace newsrank {

struct CoefficientReport {
  std::vector<std::pair<std::string, double>> positive;  // descending
  std::vector<std::pair<std::string, double>> negative;  // ascending
  std::string model_name;
};

/// Up to k strictly positive and k strictly negative coefficients with their
/// n-grams. The bias is not reported.
CoefficientReport top_coefficients(const LinearModel& model, const Vocabulary& vocab,
                                   std::size_t k, std::string model_name = "logreg");

/// "term,coefficient" CSV for one side of the report.
std::string coefficients_csv(const std::vector<std::pair<std::string, double>>& side);

/// Side-by-side plain-text table: top positive | top negative.
std::string format_coefficient_table(const CoefficientReport& report);

}  // namespace newsrank
