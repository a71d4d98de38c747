#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "urbanrhythm/linalg.hpp"

namespace urbanrhythm::validate {

// Usage counts U[i][j] of app category i under state j.
struct UsageMatrix {
  std::vector<std::string> apps;
  std::vector<std::string> states;
  linalg::DenseMatrix counts;
};

struct TfidfResult {
  linalg::DenseMatrix scores;
  std::vector<std::size_t> zero_rows;     // apps with no usage at all
  std::vector<std::size_t> zero_columns;  // states with no usage at all
};

// U'[i][j] = U[i][j] / sum_j U[i][j] * ln(sum_i U[i][j] / U[i][j]); zero
// cells score 0.
TfidfResult tfidf(const UsageMatrix& usage);

// Rank (1..3) of app i within state j's top three scores, 0 otherwise.
std::vector<std::vector<int>> top_three(const TfidfResult& result);

// `app_category,state,count`; rows and columns in first-appearance order,
// repeated (app, state) pairs accumulate.
UsageMatrix read_usage_counts(std::istream& in);
void write_usage_counts(std::ostream& out, const UsageMatrix& usage);
void write_scores_csv(std::ostream& out, const UsageMatrix& usage, const TfidfResult& result);
void write_scores_markdown(std::ostream& out, const UsageMatrix& usage, const TfidfResult& result);

}  // namespace urbanrhythm::validate
