#include "urbanrhythm/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "urbanrhythm/error.hpp"
#include "urbanrhythm/io.hpp"

namespace urbanrhythm::validate {

TfidfResult tfidf(const UsageMatrix& usage) {
  const auto& u = usage.counts;
  if (!u.all_finite()) throw Error(ErrorKind::NonFiniteInput, "usage counts contain NaN or Inf");
  std::vector<double> row_sum(u.rows(), 0.0), col_sum(u.cols(), 0.0);
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (u(i, j) < 0.0) throw Error(ErrorKind::MalformedInput, "usage counts must be non-negative");
      row_sum[i] += u(i, j);
      col_sum[j] += u(i, j);
    }
  }
  TfidfResult result;
  result.scores = linalg::DenseMatrix(u.rows(), u.cols());
  for (std::size_t i = 0; i < u.rows(); ++i) {
    if (row_sum[i] == 0.0) result.zero_rows.push_back(i);
  }
  for (std::size_t j = 0; j < u.cols(); ++j) {
    if (col_sum[j] == 0.0) result.zero_columns.push_back(j);
  }
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      const double x = u(i, j);
      if (x == 0.0) continue;
      result.scores(i, j) = (x / row_sum[i]) * std::log(col_sum[j] / x);
    }
  }
  return result;
}

std::vector<std::vector<int>> top_three(const TfidfResult& result) {
  const auto& s = result.scores;
  std::vector<std::vector<int>> rank(s.rows(), std::vector<int>(s.cols(), 0));
  for (std::size_t j = 0; j < s.cols(); ++j) {
    std::vector<std::size_t> order(s.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s(a, j) > s(b, j); });
    for (std::size_t r = 0; r < std::min<std::size_t>(3, order.size()); ++r) {
      if (s(order[r], j) > 0.0) rank[order[r]][j] = static_cast<int>(r + 1);
    }
  }
  return rank;
}

UsageMatrix read_usage_counts(std::istream& in) {
  std::vector<std::string> apps, states;
  std::map<std::string, std::size_t> app_index, state_index;
  std::map<std::pair<std::size_t, std::size_t>, double> cells;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = io::trim(line);
    if (text.empty() || line_no == 1) continue;
    const auto fields = io::split(text, ',');
    double count = 0.0;
    if (fields.size() != 3 || !io::parse_double(fields[2], count) || count < 0.0) {
      throw Error(ErrorKind::MalformedInput, "usage line " + std::to_string(line_no) + " is malformed");
    }
    const std::string app(io::trim(fields[0]));
    const std::string state(io::trim(fields[1]));
    if (app_index.emplace(app, apps.size()).second) apps.push_back(app);
    if (state_index.emplace(state, states.size()).second) states.push_back(state);
    cells[{app_index[app], state_index[state]}] += count;
  }
  if (apps.empty()) throw Error(ErrorKind::EmptyInput, "usage file holds no rows");
  UsageMatrix usage{apps, states, linalg::DenseMatrix(apps.size(), states.size())};
  for (const auto& [key, count] : cells) usage.counts(key.first, key.second) = count;
  return usage;
}

void write_usage_counts(std::ostream& out, const UsageMatrix& usage) {
  out << "app_category,state,count\n";
  for (std::size_t i = 0; i < usage.apps.size(); ++i) {
    for (std::size_t j = 0; j < usage.states.size(); ++j) {
      out << usage.apps[i] << ',' << usage.states[j] << ',' << io::format_double(usage.counts(i, j)) << '\n';
    }
  }
}

void write_scores_csv(std::ostream& out, const UsageMatrix& usage, const TfidfResult& result) {
  out << "app_category";
  for (const auto& s : usage.states) out << ',' << s;
  out << '\n';
  for (std::size_t i = 0; i < usage.apps.size(); ++i) {
    out << usage.apps[i];
    for (std::size_t j = 0; j < usage.states.size(); ++j) out << ',' << io::format_double(result.scores(i, j));
    out << '\n';
  }
}

void write_scores_markdown(std::ostream& out, const UsageMatrix& usage, const TfidfResult& result) {
  const auto rank = top_three(result);
  out << "| Usage |";
  for (const auto& s : usage.states) out << ' ' << s << " |";
  out << "\n|---|";
  for (std::size_t j = 0; j < usage.states.size(); ++j) out << "---|";
  out << '\n';
  for (std::size_t i = 0; i < usage.apps.size(); ++i) {
    out << "| " << usage.apps[i] << " |";
    for (std::size_t j = 0; j < usage.states.size(); ++j) {
      char cell[32];
      std::snprintf(cell, sizeof cell, "%.3f", result.scores(i, j));
      out << ' ' << cell << std::string(static_cast<std::size_t>(rank[i][j]), '*') << " |";
    }
    out << '\n';
  }
  out << "\n`*`, `**`, `***` mark the first, second and third highest score in each state.\n";
  for (auto i : result.zero_rows) out << "\nundefined row (no usage): " << usage.apps[i];
  for (auto j : result.zero_columns) out << "\nundefined column (no usage): " << usage.states[j];
  if (!result.zero_rows.empty() || !result.zero_columns.empty()) out << '\n';
}

}  // namespace urbanrhythm::validate
