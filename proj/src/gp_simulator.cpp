#include "wavedeform/gp_simulator.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

// Independent streams per purpose: locations, field samples.
enum Stream : std::uint32_t { kLocations = 0, kField = 1 };

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Linear: return "linear";
    case ScenarioKind::Quadratic: return "quadratic";
    case ScenarioKind::NonLinear: return "non-linear";
    case ScenarioKind::Wavelet: return "wavelet";
  }
  return "?";
}

ScenarioKind parse_scenario(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (s == "linear") return ScenarioKind::Linear;
  if (s == "quadratic") return ScenarioKind::Quadratic;
  if (s == "non-linear" || s == "nonlinear") return ScenarioKind::NonLinear;
  if (s == "wavelet") return ScenarioKind::Wavelet;
  throw DomainError("unknown scenario kind '" + std::string(name) + "'");
}

void ScenarioSpec::validate() const {
  if (n < 2) throw DomainError("scenario needs n >= 2");
  if (T < 1) throw DomainError("scenario needs T >= 1");
  params.validate();
}

SpatioTemporalDataSet ScenarioRun::dataset() const {
  SpatioTemporalDataSet d;
  d.locations = locations;
  d.observations = observations;
  return d;
}

const std::vector<double>& wavelet_scenario_coefficients() {
  // Per block: c_{0,0}, c_{1,0}, c_{1,1}.
  static const std::vector<double> c = {
      0.25,   0.01,   -0.036,  // g11
      -0.37,  0.065,  -1.2,    // g12
      -0.032, -0.043, -1.0,    // g21
      -0.031, 0.11,   0.19,    // g22
  };
  return c;
}

const Deformation& wavelet_scenario_deformation() {
  static const Deformation d = Deformation::from_coefficients(
      WaveletFamily::MexicanHat, 1, MonotoneVariant::SingleIntegral, QuadratureConfig{},
      wavelet_scenario_coefficients());
  return d;
}

Eigen::MatrixX2d generate_locations(int n, std::uint64_t seed) {
  if (n < 2) throw DomainError("generate_locations needs n >= 2");
  auto rng = make_rng(seed, kLocations);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixX2d x(n, 2);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      double v;
      do {
        v = unif(rng);
      } while (v <= 0.0 || v >= 1.0);
      x(i, c) = v;
    }
  }
  return x;
}

Eigen::Vector2d true_deformation(ScenarioKind kind, const Eigen::Vector2d& x) {
  const double x1 = x(0);
  const double x2 = x(1);
  switch (kind) {
    case ScenarioKind::Linear:
      return {0.75 * x1 + x2, x1 + 0.25 * x2};
    case ScenarioKind::Quadratic: {
      const double a = x1 - 0.5;
      const double b = x2 - 0.5;
      return {-0.5 * a * a + b + 0.6, a - 0.5 * b * b + 0.6};
    }
    case ScenarioKind::NonLinear: {
      const double a = x1 - 0.5;
      const double b = x2 - 0.5;
      const double angle = 2.5 * std::exp(-a * a - b * b) + 1.5 * std::numbers::pi;
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      return {c * a + s * b + 0.5, -s * a + c * b + 0.5};
    }
    case ScenarioKind::Wavelet:
      return wavelet_scenario_deformation()(x);
  }
  return x;
}

Eigen::MatrixX2d true_deformation(ScenarioKind kind, const Eigen::MatrixX2d& points) {
  Eigen::MatrixX2d out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out.row(i) = true_deformation(kind, Eigen::Vector2d(points.row(i).transpose())).transpose();
  return out;
}

Eigen::MatrixXd sample_gp(const Eigen::MatrixXd& sigma, int T, std::uint64_t seed) {
  if (T < 1) throw DomainError("sample_gp needs T >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sample_gp: covariance is not SPD");
  auto rng = make_rng(seed, kField);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = sigma.rows();
  Eigen::MatrixXd eps(n, T);
  // Column-major fill: draw t is the t-th block of n normals.
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index i = 0; i < n; ++i) eps(i, t) = normal(rng);
  return llt.matrixL() * eps;
}

ScenarioRun simulate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  ScenarioRun run;
  run.locations = generate_locations(spec.n, spec.seed);
  run.true_deformed = true_deformation(spec.kind, run.locations);
  const Eigen::MatrixXd sigma =
      build_covariance(DeformedCoordinates(run.true_deformed), spec.params);
  run.observations = sample_gp(sigma, spec.T, spec.seed);
  run.empirical_corr = empirical_correlation(run.observations);
  const Eigen::VectorXd sd = sigma.diagonal().cwiseSqrt();
  run.true_corr = sd.cwiseInverse().asDiagonal() * sigma * sd.cwiseInverse().asDiagonal();
  run.true_corr.diagonal().setOnes();
  return run;
}

std::vector<ScenarioRow> run_scenario(const ScenarioSpec& spec, const ScenarioRun& run,
                                      const std::vector<FitConfig>& fit_configs) {
  const SpatioTemporalDataSet data = run.dataset();
  std::vector<ScenarioRow> rows;
  for (const FitConfig& config : fit_configs) {
    const auto start = std::chrono::steady_clock::now();
    ScenarioRow row;
    row.scenario = to_string(spec.kind);
    row.family = config.family;
    row.J = config.J;
    row.fit = fit_alternating(data, config);
    row.params = row.fit.params;
    row.mse = row.fit.mse;
    row.mse_true = correlation_mse(
        run.true_corr, fitted_correlation(row.fit.deformed_coords, row.fit.params.theta));
    row.loglik = row.fit.loglik;
    row.converged = row.fit.converged;
    row.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScenarioRow> run_scenario(const ScenarioSpec& spec,
                                      const std::vector<FitConfig>& fit_configs) {
  return run_scenario(spec, simulate_scenario(spec), fit_configs);
}

Eigen::MatrixX2d regular_grid(int g) {
  if (g < 2) throw DomainError("grid needs at least 2 points per side");
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(g) * g, 2);
  Eigen::Index r = 0;
  for (int b = 0; b < g; ++b)
    for (int a = 0; a < g; ++a, ++r) {
      out(r, 0) = static_cast<double>(a) / (g - 1);
      out(r, 1) = static_cast<double>(b) / (g - 1);
    }
  return out;
}

}  // namespace wavedeform
