#include "wavedeform/covariance_model.hpp"

#include <cmath>

#include "wavedeform/error.hpp"

namespace wavedeform {

void CovarianceParams::validate() const {
  if (!std::isfinite(nu) || !(nu > 0.0)) throw DomainError("nu must be positive and finite");
  if (!std::isfinite(theta) || !(theta > 0.0))
    throw DomainError("theta must be positive and finite");
  if (!std::isfinite(nugget) || nugget < 0.0)
    throw DomainError("nugget must be non-negative and finite");
}

DeformedCoordinates::DeformedCoordinates(Eigen::MatrixX2d points) : points_(std::move(points)) {
  if (points_.rows() < 2) throw DomainError("deformed coordinates need at least 2 points");
  if (!points_.allFinite()) throw DomainError("deformed coordinates must be finite");
}

double correlation(double theta, double distance, CorrelationFamily family) {
  if (!(theta > 0.0)) throw DomainError("correlation range theta must be positive");
  if (!(distance >= 0.0)) throw DomainError("correlation distance must be non-negative");
  switch (family) {
    case CorrelationFamily::Exponential:
      return std::exp(-distance / theta);
  }
  return 0.0;
}

Eigen::MatrixXd distance_matrix(const Eigen::MatrixX2d& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double dx = points(i, 0) - points(j, 0);
      const double dy = points(i, 1) - points(j, 1);
      d(i, j) = d(j, i) = std::sqrt(dx * dx + dy * dy);
    }
  }
  return d;
}

Eigen::MatrixXd distance_matrix(const DeformedCoordinates& coords) {
  return distance_matrix(coords.points());
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> coincident_pairs(const Eigen::MatrixX2d& points,
                                                                    double tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    for (Eigen::Index j = i + 1; j < points.rows(); ++j)
      if ((points.row(i) - points.row(j)).norm() <= tol) out.emplace_back(i, j);
  return out;
}

Eigen::MatrixXd build_covariance_from_distances(const Eigen::MatrixXd& distances,
                                                const CovarianceParams& p) {
  p.validate();
  const Eigen::Index n = distances.rows();
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i)
      sigma(i, j) = sigma(j, i) = p.nu * correlation(p.theta, distances(i, j));
    sigma(j, j) = p.nu + p.nugget;
  }
  return sigma;
}

Eigen::MatrixXd build_covariance(const DeformedCoordinates& coords, const CovarianceParams& p,
                                 CovarianceDiagnostics* diagnostics) {
  if (diagnostics) {
    for (auto [i, j] : coincident_pairs(coords.points()))
      diagnostics->warnings.push_back("DuplicatePointWarning: points " + std::to_string(i) +
                                      " and " + std::to_string(j) + " coincide");
  }
  return build_covariance_from_distances(distance_matrix(coords), p);
}

}  // namespace wavedeform
