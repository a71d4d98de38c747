#include "urbanrhythm/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "urbanrhythm/error.hpp"

namespace urbanrhythm::linalg {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> view(const DenseMatrix& m) {
  return {m.values().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

void require_fittable(const DenseMatrix& samples) {
  if (samples.rows() < 2) {
    throw Error(ErrorKind::DegenerateInput,
                "PCA needs at least 2 samples, got " + std::to_string(samples.rows()));
  }
  if (samples.cols() == 0) throw Error(ErrorKind::DegenerateInput, "PCA needs at least 1 feature");
  if (!samples.all_finite()) throw Error(ErrorKind::NonFiniteInput, "PCA input contains NaN or Inf");
}

bool rows_identical(const DenseMatrix& samples) {
  for (std::size_t r = 1; r < samples.rows(); ++r) {
    if (!std::equal(samples.row(r).begin(), samples.row(r).end(), samples.row(0).begin())) {
      return false;
    }
  }
  return true;
}

DenseMatrix centered(const DenseMatrix& samples, const std::vector<double>& mean) {
  DenseMatrix out(samples.rows(), samples.cols());
  for (std::size_t r = 0; r < samples.rows(); ++r) {
    for (std::size_t c = 0; c < samples.cols(); ++c) out(r, c) = samples(r, c) - mean[c];
  }
  return out;
}

PcaBasis zero_variance_basis(std::vector<double> mean) {
  PcaBasis basis;
  const std::size_t d = mean.size();
  basis.mean = std::move(mean);
  basis.components = DenseMatrix(1, d);
  basis.components(0, 0) = 1.0;
  basis.eigenvalues = {0.0};
  basis.explained_variance_ratio = {1.0};
  return basis;
}

// Eigenpairs of the sample covariance, computed in whichever of the d x d
// covariance or n x n Gram forms is smaller. Only strictly positive
// eigenvalues are returned in the Gram form.
SymmetricEigen covariance_eigen(const DenseMatrix& xc, double& total_variance) {
  const std::size_t n = xc.rows();
  const std::size_t d = xc.cols();
  const auto x = view(xc);
  const double scale = 1.0 / static_cast<double>(n);
  if (d <= n) {
    RowMajor cov = (x.transpose() * x) * scale;
    DenseMatrix c(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) c(i, j) = 0.5 * (cov(i, j) + cov(j, i));
    }
    SymmetricEigen eig = eigen_symmetric(c);
    total_variance = 0.0;
    for (std::size_t i = 0; i < d; ++i) total_variance += c(i, i);
    return eig;
  }

  RowMajor gram = (x * x.transpose()) * scale;
  DenseMatrix g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g(i, j) = 0.5 * (gram(i, j) + gram(j, i));
  }
  total_variance = 0.0;
  for (std::size_t i = 0; i < n; ++i) total_variance += g(i, i);
  const SymmetricEigen dual = eigen_symmetric(g);
  const double top = dual.values.empty() ? 0.0 : dual.values.front();
  SymmetricEigen out;
  std::vector<std::pair<double, std::vector<double>>> pairs;
  for (std::size_t k = 0; k < dual.values.size(); ++k) {
    if (!(dual.values[k] > top * 1e-12) || dual.values[k] <= 0.0) break;
    Eigen::Map<const Eigen::VectorXd> u(dual.vectors.row(k).data(), static_cast<Eigen::Index>(n));
    Eigen::VectorXd v = x.transpose() * u;
    const double norm = v.norm();
    if (!(norm > 0.0)) break;
    v /= norm;
    std::vector<double> vec(v.data(), v.data() + d);
    normalize_sign(vec);
    pairs.emplace_back(dual.values[k], std::move(vec));
  }
  out.vectors = DenseMatrix(pairs.size(), d);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.values.push_back(pairs[k].first);
    std::copy(pairs[k].second.begin(), pairs[k].second.end(), out.vectors.row(k).begin());
  }
  return out;
}

PcaBasis fit_impl(const DenseMatrix& samples, const RetentionRule& retention) {
  require_fittable(samples);
  std::vector<double> mean = column_means(samples);
  if (rows_identical(samples)) {
    if (retention.kind() == RetentionRule::Kind::All) {
      PcaBasis basis;
      const std::size_t d = samples.cols();
      basis.mean = std::move(mean);
      basis.components = DenseMatrix(d, d);
      for (std::size_t i = 0; i < d; ++i) basis.components(i, i) = 1.0;
      basis.eigenvalues.assign(d, 0.0);
      basis.explained_variance_ratio.assign(d, 0.0);
      basis.explained_variance_ratio[0] = 1.0;
      return basis;
    }
    return zero_variance_basis(std::move(mean));
  }

  const DenseMatrix xc = centered(samples, mean);
  double total = 0.0;
  SymmetricEigen eig = covariance_eigen(xc, total);
  for (double& v : eig.values) v = std::max(v, 0.0);

  std::size_t keep = 0;
  const double top = eig.values.empty() ? 0.0 : eig.values.front();
  switch (retention.kind()) {
    case RetentionRule::Kind::MinRatio:
      for (double v : eig.values) {
        if (total > 0.0 && v / total > retention.ratio()) ++keep;
      }
      keep = std::max<std::size_t>(keep, 1);
      break;
    case RetentionRule::Kind::FixedK: {
      std::size_t rank = 0;
      for (double v : eig.values) {
        if (v > top * 1e-12 && v > 0.0) ++rank;
      }
      keep = std::max<std::size_t>(1, std::min(retention.k(), rank));
      break;
    }
    case RetentionRule::Kind::All:
      keep = eig.values.size();
      break;
  }
  keep = std::min(keep, eig.values.size());

  PcaBasis basis;
  basis.mean = std::move(mean);
  basis.components = DenseMatrix(keep, samples.cols());
  for (std::size_t k = 0; k < keep; ++k) {
    std::copy(eig.vectors.row(k).begin(), eig.vectors.row(k).end(), basis.components.row(k).begin());
    basis.eigenvalues.push_back(eig.values[k]);
    basis.explained_variance_ratio.push_back(total > 0.0 ? eig.values[k] / total : 0.0);
  }
  return basis;
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorKind::DimensionMismatch, "matrix value count does not match its shape");
  }
}

bool DenseMatrix::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

RetentionRule RetentionRule::min_ratio(double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "retention ratio must lie in (0, 1)");
  }
  return RetentionRule(Kind::MinRatio, ratio, 0);
}

RetentionRule RetentionRule::fixed_k(std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidConfig, "fixed_k must be at least 1");
  return RetentionRule(Kind::FixedK, 0.0, k);
}

void normalize_sign(std::span<double> v) {
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  if (peak == 0.0) return;
  for (double& x : v) {
    if (std::abs(x) >= (1.0 - 1e-9) * peak) {
      if (x < 0.0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

SymmetricEigen eigen_symmetric(const DenseMatrix& symmetric) {
  if (symmetric.rows() != symmetric.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "eigendecomposition needs a square matrix");
  }
  const std::size_t d = symmetric.rows();
  Eigen::MatrixXd m = view(symmetric);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NonFiniteInput, "symmetric eigensolver failed to converge");
  }

  struct Pair {
    double value;
    std::vector<double> vector;
  };
  std::vector<Pair> pairs(d);
  for (std::size_t k = 0; k < d; ++k) {
    const auto col = solver.eigenvectors().col(static_cast<Eigen::Index>(k));
    pairs[k].value = solver.eigenvalues()(static_cast<Eigen::Index>(k));
    pairs[k].vector.assign(col.data(), col.data() + d);
    normalize_sign(pairs[k].vector);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.value != b.value) return a.value > b.value;
    return std::lexicographical_compare(a.vector.begin(), a.vector.end(), b.vector.begin(),
                                        b.vector.end());
  });

  SymmetricEigen out;
  out.vectors = DenseMatrix(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    out.values.push_back(pairs[k].value);
    std::copy(pairs[k].vector.begin(), pairs[k].vector.end(), out.vectors.row(k).begin());
  }
  return out;
}

std::vector<double> column_means(const DenseMatrix& samples) {
  // Shifted by the first row: identical rows yield that row exactly.
  std::vector<double> mean(samples.cols(), 0.0);
  if (samples.rows() == 0) return mean;
  const double n = static_cast<double>(samples.rows());
  for (std::size_t c = 0; c < samples.cols(); ++c) {
    const double origin = samples(0, c);
    double acc = 0.0;
    for (std::size_t r = 1; r < samples.rows(); ++r) acc += samples(r, c) - origin;
    mean[c] = origin + acc / n;
  }
  return mean;
}

DenseMatrix covariance(const DenseMatrix& samples) {
  const std::vector<double> mean = column_means(samples);
  const DenseMatrix xc = centered(samples, mean);
  const auto x = view(xc);
  RowMajor cov = (x.transpose() * x) / static_cast<double>(samples.rows());
  DenseMatrix out(samples.cols(), samples.cols());
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) = cov(i, j);
  }
  return out;
}

PcaBasis fit_pca(const DenseMatrix& samples, const RetentionRule& retention) {
  return fit_impl(samples, retention);
}

PcaBasis fit_klt(const DenseMatrix& samples) {
  PcaBasis basis = fit_impl(samples, RetentionRule::all());
  // The Gram route can return fewer than c vectors; complete the basis so the
  // rotation stays full rank.
  const std::size_t c = samples.cols();
  if (basis.size() < c) {
    DenseMatrix full(c, c);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      std::copy(basis.components.row(k).begin(), basis.components.row(k).end(), full.row(k).begin());
    }
    std::size_t filled = basis.size();
    for (std::size_t axis = 0; axis < c && filled < c; ++axis) {
      std::vector<double> v(c, 0.0);
      v[axis] = 1.0;
      for (std::size_t k = 0; k < filled; ++k) {
        double dot = 0.0;
        for (std::size_t i = 0; i < c; ++i) dot += v[i] * full(k, i);
        for (std::size_t i = 0; i < c; ++i) v[i] -= dot * full(k, i);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm < 1e-8) continue;
      for (double& x : v) x /= norm;
      normalize_sign(v);
      std::copy(v.begin(), v.end(), full.row(filled).begin());
      basis.eigenvalues.push_back(0.0);
      basis.explained_variance_ratio.push_back(0.0);
      ++filled;
    }
    basis.components = std::move(full);
  }
  return basis;
}

void project_row(const PcaBasis& basis, std::span<const double> sample, std::span<double> out) {
  const std::size_t d = basis.dimension();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto comp = basis.components.row(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) acc += (sample[i] - basis.mean[i]) * comp[i];
    out[k] = acc;
  }
}

DenseMatrix project(const PcaBasis& basis, const DenseMatrix& samples) {
  if (samples.cols() != basis.dimension()) {
    throw Error(ErrorKind::DimensionMismatch,
                "sample width " + std::to_string(samples.cols()) + " does not match basis dimension " +
                    std::to_string(basis.dimension()));
  }
  DenseMatrix out(samples.rows(), basis.size());
  for (std::size_t r = 0; r < samples.rows(); ++r) project_row(basis, samples.row(r), out.row(r));
  return out;
}

DenseMatrix reconstruct(const PcaBasis& basis, const DenseMatrix& coordinates) {
  if (coordinates.cols() != basis.size()) {
    throw Error(ErrorKind::DimensionMismatch, "coordinate width does not match basis size");
  }
  const std::size_t d = basis.dimension();
  DenseMatrix out(coordinates.rows(), d);
  for (std::size_t r = 0; r < coordinates.rows(); ++r) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = basis.mean[i];
      for (std::size_t k = 0; k < basis.size(); ++k) acc += coordinates(r, k) * basis.components(k, i);
      out(r, i) = acc;
    }
  }
  return out;
}

}  // namespace urbanrhythm::linalg
