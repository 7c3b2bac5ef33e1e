#ifndef WAVEDEFORM_COVARIANCE_MODEL_HPP
#define WAVEDEFORM_COVARIANCE_MODEL_HPP

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace wavedeform {

// (nu, theta, nugget): spatial variance, range of the correlation, and the
// measurement-error variance added on the diagonal.
struct CovarianceParams {
  double nu = 1.0;
  double theta = 0.25;
  double nugget = 0.05;

  void validate() const;
  bool operator==(const CovarianceParams&) const = default;
};

enum class CorrelationFamily { Exponential };

// Points in the deformed plane, one row per site.
class DeformedCoordinates {
 public:
  explicit DeformedCoordinates(Eigen::MatrixX2d points);

  const Eigen::MatrixX2d& points() const { return points_; }
  Eigen::Index size() const { return points_.rows(); }

 private:
  Eigen::MatrixX2d points_;
};

double correlation(double theta, double distance,
                   CorrelationFamily family = CorrelationFamily::Exponential);

Eigen::MatrixXd distance_matrix(const Eigen::MatrixX2d& points);
Eigen::MatrixXd distance_matrix(const DeformedCoordinates& coords);

// Pairs (i < j) closer than `tol`.
std::vector<std::pair<Eigen::Index, Eigen::Index>> coincident_pairs(const Eigen::MatrixX2d& points,
                                                                    double tol = 1e-12);

struct CovarianceDiagnostics {
  std::vector<std::string> warnings;
};

// Sigma_ij = nu * rho(|y_i - y_j|), Sigma_ii = nu + nugget. Filled from the
// upper triangle, so the result is exactly symmetric. Coincident points are
// reported through `diagnostics` (DuplicatePointWarning) when provided.
Eigen::MatrixXd build_covariance(const DeformedCoordinates& coords, const CovarianceParams& p,
                                 CovarianceDiagnostics* diagnostics = nullptr);
Eigen::MatrixXd build_covariance_from_distances(const Eigen::MatrixXd& distances,
                                                const CovarianceParams& p);

}  // namespace wavedeform

#endif  // WAVEDEFORM_COVARIANCE_MODEL_HPP
