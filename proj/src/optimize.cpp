#include "wavedeform/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

// Value handed to GSL for points where the objective is undefined.
constexpr double kPenalty = 1e300;

struct GslSetup {
  GslSetup() { gsl_set_error_handler_off(); }
};
const GslSetup gsl_setup;

using VectorPtr = std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)>;

VectorPtr make_vector(std::span<const double> x) {
  VectorPtr v(gsl_vector_alloc(x.size()), &gsl_vector_free);
  for (std::size_t i = 0; i < x.size(); ++i) gsl_vector_set(v.get(), i, x[i]);
  return v;
}

// Tracks the best (largest) objective value seen across all evaluations.
struct Tracker {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x;
  int evaluations = 0;

  void record(std::span<const double> x, double value) {
    ++evaluations;
    if (std::isfinite(value) && value > best) {
      best = value;
      best_x.assign(x.begin(), x.end());
    }
  }
};

struct SimplexContext {
  const Objective* f;
  Tracker tracker;
  std::vector<double> scratch;
};

double simplex_callback(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<SimplexContext*>(params);
  ctx->scratch.assign(x->data, x->data + x->size);
  double value;
  try {
    value = (*ctx->f)(ctx->scratch);
  } catch (const NotPositiveDefinite&) {
    value = -std::numeric_limits<double>::infinity();
  }
  ctx->tracker.record(ctx->scratch, value);
  return std::isfinite(value) ? -value : kPenalty;
}

struct GradientContext {
  const ObjectiveWithGradient* f;
  bool finite_difference;
  double fd_step;
  Tracker tracker;
  std::vector<double> x;
  std::vector<double> grad;
};

double evaluate(GradientContext& ctx, const gsl_vector* x, gsl_vector* g) {
  ctx.x.assign(x->data, x->data + x->size);
  ctx.grad.assign(x->size, 0.0);
  double value;
  try {
    if (g && ctx.finite_difference) {
      Objective plain = [&ctx](std::span<const double> p) {
        std::vector<double> unused(p.size());
        return (*ctx.f)(p, unused);
      };
      value = plain(ctx.x);
      ctx.grad = finite_difference_gradient(plain, ctx.x, ctx.fd_step);
    } else {
      value = (*ctx.f)(ctx.x, ctx.grad);
    }
  } catch (const NotPositiveDefinite&) {
    value = -std::numeric_limits<double>::infinity();
  }
  ctx.tracker.record(ctx.x, value);
  const bool ok = std::isfinite(value) &&
                  std::all_of(ctx.grad.begin(), ctx.grad.end(), [](double v) { return std::isfinite(v); });
  if (g) {
    for (std::size_t i = 0; i < x->size; ++i) gsl_vector_set(g, i, ok ? -ctx.grad[i] : 0.0);
  }
  return ok ? -value : kPenalty;
}

double f_callback(const gsl_vector* x, void* params) {
  return evaluate(*static_cast<GradientContext*>(params), x, nullptr);
}

void df_callback(const gsl_vector* x, void* params, gsl_vector* g) {
  evaluate(*static_cast<GradientContext*>(params), x, g);
}

void fdf_callback(const gsl_vector* x, void* params, double* f, gsl_vector* g) {
  *f = evaluate(*static_cast<GradientContext*>(params), x, g);
}

void finish(OptimizeResult& r, const Tracker& t, std::vector<double> x0) {
  r.evaluations = t.evaluations;
  if (std::isfinite(t.best) && t.best > r.start_value) {
    r.x = t.best_x;
    r.value = t.best;
    r.stalled = false;
  } else {
    r.x = std::move(x0);
    r.value = r.start_value;
    r.stalled = true;
  }
}

}  // namespace

std::vector<double> finite_difference_gradient(const Objective& f, std::span<const double> x,
                                               double relative_step) {
  std::vector<double> p(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = relative_step * std::max(1.0, std::abs(x[i]));
    p[i] = x[i] + h;
    const double up = f(p);
    p[i] = x[i] - h;
    const double down = f(p);
    p[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

OptimizeResult maximize_simplex(const Objective& f, std::vector<double> x0,
                                const SimplexSettings& settings) {
  OptimizeResult result;
  SimplexContext ctx{&f, {}, {}};

  ctx.scratch = x0;
  result.start_value = f(x0);
  if (!std::isfinite(result.start_value))
    result.start_value = -std::numeric_limits<double>::infinity();
  ctx.tracker.record(x0, result.start_value);

  const std::size_t n = x0.size();
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n),
      &gsl_multimin_fminimizer_free);
  gsl_multimin_function fn{&simplex_callback, n, &ctx};
  auto start = make_vector(x0);
  VectorPtr step(gsl_vector_alloc(n), &gsl_vector_free);
  gsl_vector_set_all(step.get(), settings.initial_step);

  if (gsl_multimin_fminimizer_set(s.get(), &fn, start.get(), step.get()) == GSL_SUCCESS) {
    while (ctx.tracker.evaluations < settings.max_evaluations) {
      ++result.iterations;
      if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
      const double size = gsl_multimin_fminimizer_size(s.get());
      if (gsl_multimin_test_size(size, settings.size_tolerance) == GSL_SUCCESS) {
        result.converged = true;
        break;
      }
    }
  }
  finish(result, ctx.tracker, std::move(x0));
  return result;
}

OptimizeResult maximize_quasi_newton(const ObjectiveWithGradient& f, std::vector<double> x0,
                                     const QuasiNewtonSettings& settings) {
  OptimizeResult result;
  GradientContext ctx{&f, settings.finite_difference, settings.fd_relative_step, {}, {}, {}};

  const std::size_t n = x0.size();
  auto start = make_vector(x0);
  result.start_value = -evaluate(ctx, start.get(), nullptr);
  if (result.start_value <= -kPenalty)
    result.start_value = -std::numeric_limits<double>::infinity();

  std::unique_ptr<gsl_multimin_fdfminimizer, decltype(&gsl_multimin_fdfminimizer_free)> s(
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n),
      &gsl_multimin_fdfminimizer_free);
  gsl_multimin_function_fdf fn{&f_callback, &df_callback, &fdf_callback, n, &ctx};

  if (gsl_multimin_fdfminimizer_set(s.get(), &fn, start.get(), settings.initial_step,
                                    settings.line_search_tolerance) == GSL_SUCCESS) {
    double previous = s->f;
    int quiet = 0;
    while (result.iterations < settings.max_iterations) {
      ++result.iterations;
      const int status = gsl_multimin_fdfminimizer_iterate(s.get());
      if (status == GSL_ENOPROG) {
        // Line search cannot improve further: a stationary point to working precision.
        result.converged = true;
        break;
      }
      if (status != GSL_SUCCESS) break;
      double gmax = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        gmax = std::max(gmax, std::abs(gsl_vector_get(s->gradient, i)));
      if (gmax < settings.gradient_tolerance) {
        result.converged = true;
        break;
      }
      const double gain = previous - s->f;
      quiet = gain <= settings.rel_tolerance * std::max(1.0, std::abs(s->f)) ? quiet + 1 : 0;
      previous = s->f;
      if (quiet >= settings.patience) {
        result.converged = true;
        break;
      }
    }
  }
  finish(result, ctx.tracker, std::move(x0));
  return result;
}

}  // namespace wavedeform
