#ifndef WAVEDEFORM_LIKELIHOOD_FIT_HPP
#define WAVEDEFORM_LIKELIHOOD_FIT_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wavedeform/covariance_model.hpp"
#include "wavedeform/monotone_map.hpp"
#include "wavedeform/optimize.hpp"

namespace wavedeform {

// n sites in the unit square observed at T times. Row i of `observations` is
// the series at site i.
struct SpatioTemporalDataSet {
  Eigen::MatrixX2d locations;
  Eigen::MatrixXd observations;
  std::vector<std::string> site_ids;

  Eigen::Index sites() const { return observations.rows(); }
  Eigen::Index times() const { return observations.cols(); }
  void validate() const;
};

struct SampleCovariance {
  Eigen::MatrixXd S;     // (1/T) sum_t (z_t - zbar)(z_t - zbar)'
  Eigen::VectorXd mean;  // zbar
  std::vector<std::string> warnings;
};

// Throws DegenerateSeries for a constant row when the nugget is not being
// fitted; otherwise records a warning.
SampleCovariance sample_covariance(const SpatioTemporalDataSet& data, bool nugget_fitted = true);

// Correlation across time of the rows of `observations`. Unit diagonal;
// off-diagonal entries involving a constant row are 0.
Eigen::MatrixXd empirical_correlation(const Eigen::MatrixXd& observations);

// -(nT/2) ln 2pi - (T/2) ln det Sigma - (T/2) tr(Sigma^{-1} S), via Cholesky.
// Throws NotPositiveDefinite.
double log_likelihood(const Eigen::MatrixXd& S, const Eigen::MatrixXd& sigma, long T);
double log_likelihood(const SampleCovariance& S, const Eigen::MatrixXd& sigma, long T);

struct FitConfig {
  WaveletFamily family = WaveletFamily::MexicanHat;
  int J = 2;
  MonotoneVariant variant = MonotoneVariant::SingleIntegral;
  QuadratureConfig quadrature;

  std::uint64_t init_seed = 1;
  double init_scale = 0.1;
  int restarts = 1;
  int outer_max_iters = 100;
  double outer_rel_tol = 1e-6;

  SimplexSettings gamma_optimizer;
  QuasiNewtonSettings coeff_optimizer;

  bool fit_nugget = true;
  double fixed_nugget = 0.0;  // used when fit_nugget is false
  bool fit_coefficients = true;
  std::optional<std::vector<double>> initial_coefficients;
  std::optional<CovarianceParams> initial_params;

  // Rescale the reported deformation (common C1) and theta together so the
  // deformed sites have the same centroid size as the input locations. The
  // fitted covariance is unchanged; only the reporting gauge is fixed.
  // Ignored when the coefficients are held fixed.
  bool normalize_scale = true;

  int threads = 1;

  std::size_t coefficient_count() const { return 4 * expansion_size(family, J); }
  void validate() const;
};

// Which of (nu, theta, nugget) the gamma step is allowed to move.
struct GammaMask {
  bool nu = true;
  bool theta = true;
  bool nugget = true;
};

// Centered data, tabulated deformation kernel and sample covariance for one
// dataset/configuration pair. Objective evaluations are pure and can run
// concurrently.
class LikelihoodProblem {
 public:
  LikelihoodProblem(const SpatioTemporalDataSet& data, const FitConfig& config);

  long times() const { return T_; }
  Eigen::Index sites() const { return locations_.rows(); }
  const SampleCovariance& sample() const { return sample_; }
  const DeformationKernel& kernel() const { return kernel_; }
  const FitConfig& config() const { return config_; }
  const Eigen::MatrixX2d& locations() const { return locations_; }

  Eigen::MatrixX2d deformed(std::span<const double> coefficients) const;

  // Log-likelihood at (c, gamma). Throws NotPositiveDefinite.
  double objective(std::span<const double> coefficients, const CovarianceParams& gamma) const;
  // Same value plus d/dc written into `grad`.
  double objective_with_gradient(std::span<const double> coefficients,
                                 const CovarianceParams& gamma, std::span<double> grad) const;

  // Starting gamma derived from the data scale and the deformed distances.
  CovarianceParams default_gamma(std::span<const double> coefficients) const;

 private:
  FitConfig config_;
  Eigen::MatrixX2d locations_;
  SampleCovariance sample_;
  long T_;
  DeformationKernel kernel_;
};

struct StepResult {
  double value = 0.0;
  bool stalled = false;
  int evaluations = 0;
};

CovarianceParams fit_gamma_step(const LikelihoodProblem& problem,
                                std::span<const double> coefficients,
                                const CovarianceParams& gamma_init, GammaMask mask = {},
                                StepResult* info = nullptr);
std::vector<double> fit_coeff_step(const LikelihoodProblem& problem, const CovarianceParams& gamma,
                                   std::span<const double> c_init, StepResult* info = nullptr);

// Convenience forms that build the problem from (data, config).
double objective(std::span<const double> coefficients, const CovarianceParams& gamma,
                 const SpatioTemporalDataSet& data, const FitConfig& config);
CovarianceParams fit_gamma_step(std::span<const double> coefficients,
                                const SpatioTemporalDataSet& data, const FitConfig& config,
                                const CovarianceParams& gamma_init);
std::vector<double> fit_coeff_step(const CovarianceParams& gamma, const SpatioTemporalDataSet& data,
                                   const FitConfig& config, std::span<const double> c_init);

struct FitResult {
  WaveletFamily family = WaveletFamily::MexicanHat;
  int J = 0;
  MonotoneVariant variant = MonotoneVariant::SingleIntegral;
  QuadratureConfig quadrature;
  std::vector<double> coefficients;
  double scale = 1.0;  // C1 shared by the four components
  CovarianceParams params;  // theta in the same gauge as deformed_coords
  Eigen::MatrixX2d deformed_coords;
  Eigen::MatrixX2d aligned_coords;  // Procrustes-aligned to the input locations
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  double mse = 0.0;
  bool converged = false;
  int iterations = 0;
  int restart = 0;
  std::vector<std::string> warnings;

  // Deformation with C1 = scale, mapping locations onto deformed_coords.
  Deformation deformation() const;
};

FitResult fit_alternating(const SpatioTemporalDataSet& data, const FitConfig& config);

// Root-mean-square distance of the points from their centroid.
double centroid_size(const Eigen::MatrixX2d& points);

// Mean over all n^2 entries of (empirical - fitted)^2.
double correlation_mse(const Eigen::MatrixXd& empirical, const Eigen::MatrixXd& fitted);
// exp(-|y_i - y_j| / theta)
Eigen::MatrixXd fitted_correlation(const Eigen::MatrixX2d& deformed, double theta);
double correlation_mse(const SpatioTemporalDataSet& data, const FitResult& result);

// Similarity transform (translation, rotation, uniform scale) of `source`
// that best matches `target` in least squares.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix2d rotation = Eigen::Matrix2d::Identity();
  Eigen::RowVector2d translation = Eigen::RowVector2d::Zero();

  Eigen::MatrixX2d apply(const Eigen::MatrixX2d& points) const;
};
SimilarityTransform procrustes(const Eigen::MatrixX2d& source, const Eigen::MatrixX2d& target);

}  // namespace wavedeform

#endif  // WAVEDEFORM_LIKELIHOOD_FIT_HPP
