#ifndef WAVEDEFORM_OPTIMIZE_HPP
#define WAVEDEFORM_OPTIMIZE_HPP

#include <functional>
#include <span>
#include <vector>

namespace wavedeform {

// Thin maximizing wrappers over GSL's multimin drivers. Both track the best
// point ever evaluated, so the returned value is never below the value at the
// starting point (ascent contract) even if the driver wanders off.

struct SimplexSettings {
  int max_evaluations = 4000;
  double initial_step = 0.5;
  double size_tolerance = 1e-7;
};

struct QuasiNewtonSettings {
  int max_iterations = 100;
  double initial_step = 0.05;
  double line_search_tolerance = 0.1;
  // Stop when the gradient infinity-norm falls below this.
  double gradient_tolerance = 1e-7;
  // ... or when the objective improves by less than rel_tolerance * |f| for
  // `patience` consecutive iterations.
  double rel_tolerance = 1e-12;
  int patience = 5;
  // Central finite differences with step fd_relative_step * max(1, |x_i|)
  // replace the analytic gradient when true.
  bool finite_difference = false;
  double fd_relative_step = 1e-5;
};

struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  double start_value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
  // No point strictly better than the start was found.
  bool stalled = false;
};

using Objective = std::function<double(std::span<const double>)>;
// Returns f(x) and writes df/dx into grad.
using ObjectiveWithGradient = std::function<double(std::span<const double>, std::span<double>)>;

OptimizeResult maximize_simplex(const Objective& f, std::vector<double> x0,
                                const SimplexSettings& settings = {});

OptimizeResult maximize_quasi_newton(const ObjectiveWithGradient& f, std::vector<double> x0,
                                     const QuasiNewtonSettings& settings = {});

// Central-difference gradient of f at x with per-coordinate step
// relative_step * max(1, |x_i|).
std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x,
                                               double relative_step = 1e-5);

}  // namespace wavedeform

#endif  // WAVEDEFORM_OPTIMIZE_HPP
