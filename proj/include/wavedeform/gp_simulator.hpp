#ifndef WAVEDEFORM_GP_SIMULATOR_HPP
#define WAVEDEFORM_GP_SIMULATOR_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wavedeform/covariance_model.hpp"
#include "wavedeform/likelihood_fit.hpp"
#include "wavedeform/monotone_map.hpp"

namespace wavedeform {

enum class ScenarioKind { Linear, Quadratic, NonLinear, Wavelet };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario(std::string_view name);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Linear;
  int n = 50;
  int T = 2048;
  CovarianceParams params{1.0, 0.25, 0.05};
  std::uint64_t seed = 1;

  void validate() const;
};

struct ScenarioRun {
  Eigen::MatrixX2d locations;
  Eigen::MatrixX2d true_deformed;
  Eigen::MatrixXd observations;    // n x T
  Eigen::MatrixXd empirical_corr;  // n x n
  Eigen::MatrixXd true_corr;       // correlation matrix of the generating covariance

  SpatioTemporalDataSet dataset() const;
};

// Coefficients (g11, g12, g21, g22 blocks, Mexican hat, J = 1) of the
// wavelet ground-truth deformation.
const std::vector<double>& wavelet_scenario_coefficients();
const Deformation& wavelet_scenario_deformation();

// i.i.d. uniform points in the open unit square.
Eigen::MatrixX2d generate_locations(int n, std::uint64_t seed);

Eigen::Vector2d true_deformation(ScenarioKind kind, const Eigen::Vector2d& x);
Eigen::MatrixX2d true_deformation(ScenarioKind kind, const Eigen::MatrixX2d& points);

// n x T matrix whose columns are independent N(0, sigma) draws L * eps.
// Throws NotPositiveDefinite.
Eigen::MatrixXd sample_gp(const Eigen::MatrixXd& sigma, int T, std::uint64_t seed);

ScenarioRun simulate_scenario(const ScenarioSpec& spec);

struct ScenarioRow {
  std::string scenario;
  WaveletFamily family = WaveletFamily::MexicanHat;
  int J = 0;
  CovarianceParams params;
  double mse = 0.0;
  double mse_true = 0.0;  // against the generating model's correlation matrix
  double loglik = 0.0;
  bool converged = false;
  double seconds = 0.0;
  FitResult fit;
};

// Simulates `spec` once and fits every configuration to the same data.
std::vector<ScenarioRow> run_scenario(const ScenarioSpec& spec,
                                      const std::vector<FitConfig>& fit_configs);
std::vector<ScenarioRow> run_scenario(const ScenarioSpec& spec, const ScenarioRun& run,
                                      const std::vector<FitConfig>& fit_configs);

// Regular g x g grid on [0,1]^2, row-major in x2 then x1.
Eigen::MatrixX2d regular_grid(int g);

}  // namespace wavedeform

#endif  // WAVEDEFORM_GP_SIMULATOR_HPP
