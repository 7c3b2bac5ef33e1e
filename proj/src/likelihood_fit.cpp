#include "wavedeform/likelihood_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "wavedeform/error.hpp"

namespace wavedeform {

// --- data -------------------------------------------------------------------

void SpatioTemporalDataSet::validate() const {
  const Eigen::Index n = observations.rows();
  if (n < 2) throw DomainError("dataset needs at least 2 sites");
  if (observations.cols() < 2) throw DomainError("dataset needs at least 2 time points");
  if (locations.rows() != n)
    throw InconsistentLength("locations and observations disagree on the number of sites");
  if (!site_ids.empty() && static_cast<Eigen::Index>(site_ids.size()) != n)
    throw InconsistentLength("site_ids length does not match the number of sites");
  if (!observations.allFinite()) throw DomainError("observations contain non-finite values");
  if (!locations.allFinite()) throw DomainError("locations contain non-finite values");
  if ((locations.array() < 0.0).any() || (locations.array() > 1.0).any())
    throw DomainError("locations must lie in the unit square");
  if (!coincident_pairs(locations, 0.0).empty())
    throw DomainError("locations must be pairwise distinct");
}

SampleCovariance sample_covariance(const SpatioTemporalDataSet& data, bool nugget_fitted) {
  const Eigen::Index n = data.observations.rows();
  const Eigen::Index T = data.observations.cols();
  SampleCovariance out;
  out.mean = data.observations.rowwise().mean();
  const Eigen::MatrixXd centered = data.observations.colwise() - out.mean;
  out.S = (centered * centered.transpose()) / static_cast<double>(T);
  // Exact symmetry.
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) out.S(j, i) = out.S(i, j);
  for (Eigen::Index i = 0; i < n; ++i) {
    if ((data.observations.row(i).array() == data.observations(i, 0)).all()) {
      const std::string msg = "DegenerateSeries: site " + std::to_string(i) + " is constant";
      if (!nugget_fitted) throw DegenerateSeries(msg);
      out.warnings.push_back(msg);
    }
  }
  return out;
}

Eigen::MatrixXd empirical_correlation(const Eigen::MatrixXd& observations) {
  const Eigen::Index n = observations.rows();
  const Eigen::VectorXd mean = observations.rowwise().mean();
  const Eigen::MatrixXd centered = observations.colwise() - mean;
  const Eigen::MatrixXd cross = centered * centered.transpose();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < j; ++i) {
      const double denom = std::sqrt(cross(i, i) * cross(j, j));
      double r = denom > 0.0 ? cross(i, j) / denom : 0.0;
      r = std::clamp(r, -1.0, 1.0);
      corr(i, j) = corr(j, i) = r;
    }
  }
  return corr;
}

double log_likelihood(const Eigen::MatrixXd& S, const Eigen::MatrixXd& sigma, long T) {
  const Eigen::Index n = sigma.rows();
  if (sigma.cols() != n || S.rows() != n || S.cols() != n)
    throw DomainError("log_likelihood: dimension mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("covariance matrix is not positive definite");
  const auto L = llt.matrixL();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = llt.matrixLLT()(i, i);
    if (!(d > 0.0) || !std::isfinite(d))
      throw NotPositiveDefinite("covariance matrix is not positive definite");
    log_det += std::log(d);
  }
  log_det *= 2.0;
  // tr(Sigma^{-1} S) = tr(L^{-1} S L^{-T})
  const Eigen::MatrixXd M = L.solve(S);
  const Eigen::MatrixXd N = L.solve(M.transpose());
  const double trace = N.trace();
  const double Td = static_cast<double>(T);
  return -0.5 * static_cast<double>(n) * Td * std::log(2.0 * std::numbers::pi) -
         0.5 * Td * log_det - 0.5 * Td * trace;
}

double log_likelihood(const SampleCovariance& S, const Eigen::MatrixXd& sigma, long T) {
  return log_likelihood(S.S, sigma, T);
}

void FitConfig::validate() const {
  if (J < 0) throw DomainError("J must be non-negative");
  expansion_size(family, J);
  quadrature.validate();
  if (!(init_scale >= 0.0)) throw DomainError("init_scale must be non-negative");
  if (restarts < 1) throw DomainError("restarts must be at least 1");
  if (outer_max_iters < 0) throw DomainError("outer_max_iters must be non-negative");
  if (!(outer_rel_tol > 0.0)) throw DomainError("outer_rel_tol must be positive");
  if (!fit_nugget && fixed_nugget < 0.0) throw DomainError("fixed_nugget must be non-negative");
  if (initial_coefficients && initial_coefficients->size() != coefficient_count())
    throw DomainError("initial_coefficients has the wrong length");
  if (initial_params) initial_params->validate();
  if (threads < 1) throw DomainError("threads must be at least 1");
}

// --- objective --------------------------------------------------------------

LikelihoodProblem::LikelihoodProblem(const SpatioTemporalDataSet& data, const FitConfig& config)
    : config_((config.validate(), config)),
      locations_((data.validate(), data.locations)),
      sample_(sample_covariance(data, config.fit_nugget)),
      T_(static_cast<long>(data.times())),
      kernel_(data.locations, config.family, config.J, config.variant, config.quadrature) {}

Eigen::MatrixX2d LikelihoodProblem::deformed(std::span<const double> coefficients) const {
  return kernel_.deform(coefficients);
}

double LikelihoodProblem::objective(std::span<const double> coefficients,
                                   const CovarianceParams& gamma) const {
  const Eigen::MatrixX2d y = kernel_.deform(coefficients);
  if (!y.allFinite()) throw NotPositiveDefinite("deformed coordinates are not finite");
  const Eigen::MatrixXd sigma = build_covariance_from_distances(distance_matrix(y), gamma);
  return log_likelihood(sample_.S, sigma, T_);
}

double LikelihoodProblem::objective_with_gradient(std::span<const double> coefficients,
                                                  const CovarianceParams& gamma,
                                                  std::span<double> grad) const {
  std::array<Eigen::MatrixXd, 4> dg;
  const Eigen::MatrixX2d y = kernel_.deform(coefficients, dg);
  if (!y.allFinite()) throw NotPositiveDefinite("deformed coordinates are not finite");
  const Eigen::MatrixXd dist = distance_matrix(y);
  const Eigen::MatrixXd sigma = build_covariance_from_distances(dist, gamma);
  const double value = log_likelihood(sample_.S, sigma, T_);

  // dl/dSigma = (T/2) (Sigma^{-1} S Sigma^{-1} - Sigma^{-1})
  const Eigen::Index n = sigma.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd G = 0.5 * static_cast<double>(T_) * (inv * sample_.S * inv - inv);

  // dl/dy_i = -sum_j K_ij (y_i - y_j),  K_ij = 2 G_ij Sigma_ij / (theta d_ij)
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j && dist(i, j) > 0.0)
        K(i, j) = 2.0 * G(i, j) * sigma(i, j) / (gamma.theta * dist(i, j));
  const Eigen::VectorXd row_sum = K.rowwise().sum();
  const Eigen::MatrixX2d dy = -(row_sum.asDiagonal() * y - K * y);

  const std::size_t block = kernel_.block_size();
  for (std::size_t comp = 0; comp < 4; ++comp) {
    const auto l = static_cast<Eigen::Index>(comp / 2);
    Eigen::Map<Eigen::VectorXd> out(grad.data() + comp * block, static_cast<Eigen::Index>(block));
    out = dg[comp].transpose() * dy.col(l);
  }
  return value;
}

CovarianceParams LikelihoodProblem::default_gamma(std::span<const double> coefficients) const {
  const double scale = sample_.S.diagonal().mean();
  const Eigen::MatrixXd d = distance_matrix(kernel_.deform(coefficients));
  const Eigen::Index n = d.rows();
  const double mean_dist = d.sum() / static_cast<double>(n * (n - 1));
  CovarianceParams p;
  const double v = scale > 0.0 ? scale : 1.0;
  p.nu = config_.fit_nugget ? 0.9 * v : v;
  p.nugget = config_.fit_nugget ? 0.1 * v : config_.fixed_nugget;
  p.theta = mean_dist > 0.0 ? 0.5 * mean_dist : 1.0;
  return p;
}

// --- steps ------------------------------------------------------------------

CovarianceParams fit_gamma_step(const LikelihoodProblem& problem,
                                std::span<const double> coefficients,
                                const CovarianceParams& gamma_init, GammaMask mask,
                                StepResult* info) {
  gamma_init.validate();
  if (!problem.config().fit_nugget) mask.nugget = false;
  const Eigen::MatrixXd dist = distance_matrix(problem.deformed(coefficients));

  // Free parameters live on the log scale.
  std::vector<double> x0;
  if (mask.nu) x0.push_back(std::log(gamma_init.nu));
  if (mask.theta) x0.push_back(std::log(gamma_init.theta));
  if (mask.nugget) x0.push_back(std::log(std::max(gamma_init.nugget, 1e-300)));

  auto decode = [&](std::span<const double> x) {
    CovarianceParams p = gamma_init;
    std::size_t i = 0;
    if (mask.nu) p.nu = std::exp(x[i++]);
    if (mask.theta) p.theta = std::exp(x[i++]);
    if (mask.nugget) p.nugget = std::exp(x[i++]);
    return p;
  };
  auto f = [&](std::span<const double> x) {
    const CovarianceParams p = decode(x);
    if (!(p.nu > 0.0) || !(p.theta > 0.0) || !std::isfinite(p.nu) || !std::isfinite(p.theta) ||
        !std::isfinite(p.nugget))
      return -std::numeric_limits<double>::infinity();
    return log_likelihood(problem.sample().S, build_covariance_from_distances(dist, p),
                          problem.times());
  };

  if (x0.empty()) {
    if (info) *info = {f(x0), true, 1};
    return gamma_init;
  }
  const OptimizeResult r = maximize_simplex(f, x0, problem.config().gamma_optimizer);
  if (info) *info = {r.value, r.stalled, r.evaluations};
  return r.stalled ? gamma_init : decode(r.x);
}

std::vector<double> fit_coeff_step(const LikelihoodProblem& problem, const CovarianceParams& gamma,
                                   std::span<const double> c_init, StepResult* info) {
  gamma.validate();
  if (c_init.size() != problem.kernel().coefficient_count())
    throw DomainError("coefficient vector has the wrong length");
  ObjectiveWithGradient f = [&](std::span<const double> c, std::span<double> grad) {
    return problem.objective_with_gradient(c, gamma, grad);
  };
  QuasiNewtonSettings settings = problem.config().coeff_optimizer;
  // Tolerances are per observation; the log-likelihood is a sum over n*T terms.
  settings.gradient_tolerance *=
      static_cast<double>(problem.sites()) * static_cast<double>(problem.times());
  const OptimizeResult r =
      maximize_quasi_newton(f, std::vector<double>(c_init.begin(), c_init.end()), settings);
  if (info) *info = {r.value, r.stalled, r.evaluations};
  return r.x;
}

double objective(std::span<const double> coefficients, const CovarianceParams& gamma,
                 const SpatioTemporalDataSet& data, const FitConfig& config) {
  return LikelihoodProblem(data, config).objective(coefficients, gamma);
}

CovarianceParams fit_gamma_step(std::span<const double> coefficients,
                                const SpatioTemporalDataSet& data, const FitConfig& config,
                                const CovarianceParams& gamma_init) {
  return fit_gamma_step(LikelihoodProblem(data, config), coefficients, gamma_init);
}

std::vector<double> fit_coeff_step(const CovarianceParams& gamma, const SpatioTemporalDataSet& data,
                                   const FitConfig& config, std::span<const double> c_init) {
  return fit_coeff_step(LikelihoodProblem(data, config), gamma, c_init);
}

// --- alternating fit --------------------------------------------------------

Deformation FitResult::deformation() const {
  const std::size_t block = expansion_size(family, J);
  if (coefficients.size() != 4 * block) throw DomainError("fit result has malformed coefficients");
  auto make = [&](std::size_t i) {
    std::vector<double> c(coefficients.begin() + static_cast<std::ptrdiff_t>(i * block),
                          coefficients.begin() + static_cast<std::ptrdiff_t>((i + 1) * block));
    return MonotoneFunction(WaveletExpansion(family, J, std::move(c)), variant, quadrature, 0.0,
                            scale);
  };
  return Deformation(make(0), make(1), make(2), make(3));
}

namespace {

std::vector<double> initial_coefficients(const FitConfig& config, int restart) {
  if (config.initial_coefficients) return *config.initial_coefficients;
  std::seed_seq seq{static_cast<std::uint32_t>(config.init_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(config.init_seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unif(-config.init_scale, config.init_scale);
  std::vector<double> c(config.coefficient_count());
  for (double& v : c) v = config.init_scale > 0.0 ? unif(rng) : 0.0;
  return c;
}

FitResult fit_once(const LikelihoodProblem& problem, const FitConfig& config, int restart) {
  FitResult r;
  r.family = config.family;
  r.J = config.J;
  r.variant = config.variant;
  r.quadrature = config.quadrature;
  r.restart = restart;
  r.warnings = problem.sample().warnings;

  std::vector<double> c = initial_coefficients(config, restart);
  CovarianceParams gamma = config.initial_params ? *config.initial_params : problem.default_gamma(c);

  double current = -std::numeric_limits<double>::infinity();
  try {
    current = problem.objective(c, gamma);
  } catch (const NotPositiveDefinite&) {
  }
  r.loglik_trace.push_back(current);

  // Accept a proposal only if it does not lower the canonical objective.
  auto accept = [&](const std::vector<double>& c_new, const CovarianceParams& g_new) {
    double value;
    try {
      value = problem.objective(c_new, g_new);
    } catch (const NotPositiveDefinite&) {
      return;
    }
    if (value >= current) {
      c = c_new;
      gamma = g_new;
      current = value;
    }
    r.loglik_trace.push_back(current);
  };

  if (config.outer_max_iters > 0) {
    try {
      accept(c, fit_gamma_step(problem, c, gamma));
      double previous = current;
      for (int it = 1; it <= config.outer_max_iters; ++it) {
        r.iterations = it;
        if (config.fit_coefficients) accept(fit_coeff_step(problem, gamma, c), gamma);
        accept(c, fit_gamma_step(problem, c, gamma));
        if (std::isfinite(current) && std::isfinite(previous) &&
            std::abs(current - previous) <= config.outer_rel_tol * std::abs(previous)) {
          r.converged = true;
          break;
        }
        previous = current;
      }
    } catch (const std::exception& e) {
      r.warnings.push_back(std::string("fit aborted: ") + e.what());
      r.converged = false;
    }
  }

  r.coefficients = c;
  r.params = gamma;
  r.loglik = current;
  r.deformed_coords = problem.deformed(c);
  return r;
}

}  // namespace

FitResult fit_alternating(const SpatioTemporalDataSet& data, const FitConfig& config) {
  const LikelihoodProblem problem(data, config);
  std::vector<FitResult> runs(static_cast<std::size_t>(config.restarts));

  const int workers = std::min(config.threads, config.restarts);
  if (workers <= 1) {
    for (int r = 0; r < config.restarts; ++r)
      runs[static_cast<std::size_t>(r)] = fit_once(problem, config, r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < config.restarts; r += workers)
          runs[static_cast<std::size_t>(r)] = fit_once(problem, config, r);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Best by final log-likelihood; ties go to the lowest restart index.
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].loglik > runs[best].loglik) best = r;
  FitResult result = std::move(runs[best]);

  if (config.normalize_scale && config.fit_coefficients) {
    const double size = centroid_size(result.deformed_coords);
    if (size > 0.0 && std::isfinite(size)) {
      result.scale = centroid_size(data.locations) / size;
      result.deformed_coords *= result.scale;
      result.params.theta *= result.scale;
    }
  }

  const Eigen::MatrixXd corr = empirical_correlation(data.observations);
  result.mse =
      correlation_mse(corr, fitted_correlation(result.deformed_coords, result.params.theta));
  result.aligned_coords =
      procrustes(result.deformed_coords, data.locations).apply(result.deformed_coords);
  return result;
}

// --- scoring ----------------------------------------------------------------

double centroid_size(const Eigen::MatrixX2d& points) {
  if (points.rows() == 0) return 0.0;
  const Eigen::RowVector2d mean = points.colwise().mean();
  return std::sqrt((points.rowwise() - mean).squaredNorm() / static_cast<double>(points.rows()));
}

double correlation_mse(const Eigen::MatrixXd& empirical, const Eigen::MatrixXd& fitted) {
  if (empirical.rows() != fitted.rows() || empirical.cols() != fitted.cols())
    throw DomainError("correlation_mse: dimension mismatch");
  const double n2 = static_cast<double>(empirical.size());
  return (empirical - fitted).array().square().sum() / n2;
}

Eigen::MatrixXd fitted_correlation(const Eigen::MatrixX2d& deformed, double theta) {
  const Eigen::MatrixXd d = distance_matrix(deformed);
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    for (Eigen::Index i = 0; i < d.rows(); ++i) out(i, j) = correlation(theta, d(i, j));
  return out;
}

double correlation_mse(const SpatioTemporalDataSet& data, const FitResult& result) {
  return correlation_mse(empirical_correlation(data.observations),
                         fitted_correlation(result.deformed_coords, result.params.theta));
}

Eigen::MatrixX2d SimilarityTransform::apply(const Eigen::MatrixX2d& points) const {
  Eigen::MatrixX2d out = scale * points * rotation;
  out.rowwise() += translation;
  return out;
}

SimilarityTransform procrustes(const Eigen::MatrixX2d& source, const Eigen::MatrixX2d& target) {
  if (source.rows() != target.rows() || source.rows() == 0)
    throw DomainError("procrustes: point sets differ in size");
  const Eigen::RowVector2d ms = source.colwise().mean();
  const Eigen::RowVector2d mt = target.colwise().mean();
  const Eigen::MatrixX2d a = source.rowwise() - ms;
  const Eigen::MatrixX2d b = target.rowwise() - mt;

  SimilarityTransform t;
  const double norm_a = a.squaredNorm();
  if (norm_a > 0.0) {
    // Rotation R maximizing tr(R' A'B), restricted to det R = +1.
    const Eigen::Matrix2d m = a.transpose() * b;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix2d d = Eigen::Matrix2d::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(1, 1) = -1.0;
    t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
    t.scale = (svd.singularValues().asDiagonal() * d).trace() / norm_a;
  }
  t.translation = mt - t.scale * ms * t.rotation;
  return t;
}

}  // namespace wavedeform
