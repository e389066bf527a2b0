#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rtpref {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One binary-choice trial. z = +1 means the left alternative x was chosen.
struct Observation {
  Vector x;
  Vector y;
  int z = 1;
  double t = 0.0;  // seconds
};

/// Validated, immutable collection of observations sharing one dimension.
///
/// The diameter is the empirical max of ||x_i - y_i||, and the attribute
/// differences are cached column-wise for the estimators' inner loops.
class Dataset {
 public:
  Dataset() = default;

  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  std::size_t dim() const noexcept { return dim_; }
  double diameter() const noexcept { return diameter_; }

  const Observation& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<Observation>& observations() const noexcept { return rows_; }
  auto begin() const noexcept { return rows_.begin(); }
  auto end() const noexcept { return rows_.end(); }

  /// d x n matrix; column i is x_i - y_i.
  const Matrix& diffs() const noexcept { return diffs_; }
  auto diff(std::size_t i) const { return diffs_.col(static_cast<Eigen::Index>(i)); }

  /// Rows [first, last) as a new dataset.
  Dataset slice(std::size_t first, std::size_t last) const;

 private:
  friend Dataset build_dataset(std::vector<Observation> rows);

  std::vector<Observation> rows_;
  Matrix diffs_;
  std::size_t dim_ = 0;
  double diameter_ = 0.0;
};

/// Validates every row and computes the diameter. Throws ValidationError
/// naming the offending (0-based) row index.
Dataset build_dataset(std::vector<Observation> rows);

/// (1/n) sum_i (x_i - y_i)(x_i - y_i)^T.
Matrix empirical_sigma(const Dataset& ds);

/// Linear-drift DDM: v(x, y) = (x - y)^T w, boundaries at +-b.
struct DdmParams {
  Vector w;
  double b = 1.0;

  double drift(const Vector& x, const Vector& y) const { return (x - y).dot(w); }
  void validate() const;
};

/// Lognormal race with utilities nu(x) = x^T w, start-distance log-mean d0 and
/// drift correlation rho.
struct LnrParams {
  Vector w;
  double d0 = 0.0;
  double rho = 0.0;

  void validate() const;
};

struct FitReport {
  Vector estimate;
  Vector averaged_iterate;
  Matrix sigma_hat;
  double final_loss = 0.0;
  std::size_t n_used = 0;

  // LNR fits only.
  std::optional<LnrParams> lnr;
  bool converged = true;
  double grad_norm = 0.0;
};

}  // namespace rtpref
