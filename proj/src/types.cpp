#include "rtpref/types.hpp"

#include <cmath>
#include <string>

#include "rtpref/errors.hpp"

namespace rtpref {

namespace {

std::string row_msg(std::size_t i, const std::string& what) {
  return "row " + std::to_string(i) + ": " + what;
}

}  // namespace

Dataset build_dataset(std::vector<Observation> rows) {
  if (rows.empty()) throw ValidationError("empty dataset");
  const auto d = rows.front().x.size();
  if (d < 1) throw ValidationError(row_msg(0, "dimension must be at least 1"));

  Dataset ds;
  ds.dim_ = static_cast<std::size_t>(d);
  ds.diffs_.resize(d, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.x.size() != d || r.y.size() != d) {
      throw ValidationError(row_msg(i, "dimension mismatch (expected " + std::to_string(d) + ")"));
    }
    if (!r.x.allFinite() || !r.y.allFinite()) throw ValidationError(row_msg(i, "non-finite attribute"));
    if (r.z != 1 && r.z != -1) throw ValidationError(row_msg(i, "choice must be -1 or +1"));
    if (!std::isfinite(r.t)) throw ValidationError(row_msg(i, "non-finite response time"));
    if (r.t <= 0.0) throw ValidationError(row_msg(i, "response time must be positive"));
    ds.diffs_.col(static_cast<Eigen::Index>(i)) = r.x - r.y;
  }
  ds.diameter_ = ds.diffs_.colwise().norm().maxCoeff();
  ds.rows_ = std::move(rows);
  return ds;
}

Dataset Dataset::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > rows_.size()) throw ValidationError("invalid dataset slice");
  return build_dataset({rows_.begin() + static_cast<std::ptrdiff_t>(first),
                        rows_.begin() + static_cast<std::ptrdiff_t>(last)});
}

Matrix empirical_sigma(const Dataset& ds) {
  if (ds.empty()) throw ValidationError("empty dataset");
  const Matrix& d = ds.diffs();
  Matrix sigma = (d * d.transpose()) / static_cast<double>(ds.size());
  // Exact symmetry regardless of the product's summation order.
  return (sigma + sigma.transpose()) * 0.5;
}

void DdmParams::validate() const {
  if (!(b > 0.0) || !std::isfinite(b)) throw ValidationError("boundary b must be positive and finite");
  if (w.size() < 1 || !w.allFinite()) throw ValidationError("drift weights must be finite and nonempty");
}

void LnrParams::validate() const {
  if (!(std::abs(rho) < 1.0)) throw ValidationError("rho must satisfy |rho| < 1");
  if (!std::isfinite(d0)) throw ValidationError("d0 must be finite");
  if (w.size() < 1 || !w.allFinite()) throw ValidationError("utility weights must be finite and nonempty");
}

}  // namespace rtpref
