#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace urbanrhythm::linalg {

// Row-major dense matrix of finite reals.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Either keep components whose explained-variance ratio exceeds a threshold
// (at least one), or keep a fixed count capped by the numerical rank.
class RetentionRule {
 public:
  enum class Kind { MinRatio, FixedK, All };

  static RetentionRule min_ratio(double ratio);
  static RetentionRule fixed_k(std::size_t k);
  static RetentionRule all() { return RetentionRule(Kind::All, 0.0, 0); }

  Kind kind() const { return kind_; }
  double ratio() const { return ratio_; }
  std::size_t k() const { return k_; }

 private:
  RetentionRule(Kind kind, double ratio, std::size_t k) : kind_(kind), ratio_(ratio), k_(k) {}
  Kind kind_;
  double ratio_;
  std::size_t k_;
};

struct PcaBasis {
  std::vector<double> mean;                      // length d
  DenseMatrix components;                        // k x d, orthonormal rows
  std::vector<double> eigenvalues;               // length k, population variance
  std::vector<double> explained_variance_ratio;  // length k, non-increasing

  std::size_t dimension() const { return mean.size(); }
  std::size_t size() const { return components.rows(); }

  friend bool operator==(const PcaBasis&, const PcaBasis&) = default;
};

// Eigenpairs of a symmetric matrix, ordered by eigenvalue descending. Rows of
// `vectors` are unit eigenvectors in the canonical sign convention.
struct SymmetricEigen {
  std::vector<double> values;
  DenseMatrix vectors;
};

SymmetricEigen eigen_symmetric(const DenseMatrix& symmetric);

// Flips v so that its first entry of (near-)largest magnitude is positive.
void normalize_sign(std::span<double> v);

std::vector<double> column_means(const DenseMatrix& samples);
// Population covariance (divides by n) of the rows of `samples`.
DenseMatrix covariance(const DenseMatrix& samples);

PcaBasis fit_pca(const DenseMatrix& samples, const RetentionRule& retention);
// Full-rank decorrelating rotation of the sample columns.
PcaBasis fit_klt(const DenseMatrix& samples);

DenseMatrix project(const PcaBasis& basis, const DenseMatrix& samples);
void project_row(const PcaBasis& basis, std::span<const double> sample, std::span<double> out);
DenseMatrix reconstruct(const PcaBasis& basis, const DenseMatrix& coordinates);

}  // namespace urbanrhythm::linalg
