#ifndef WAVEDEFORM_MONOTONE_MAP_HPP
#define WAVEDEFORM_MONOTONE_MAP_HPP

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wavedeform/quadrature.hpp"
#include "wavedeform/wavelet_basis.hpp"

namespace wavedeform {

// SingleIntegral:  g(x) = C0 + C1 * int_0^x exp(omega(u)) du
// DoubleIntegral:  g(x) = C0 + C1 * int_0^x exp(int_0^u omega(v) dv) du
enum class MonotoneVariant { SingleIntegral, DoubleIntegral };

std::string to_string(MonotoneVariant variant);
MonotoneVariant parse_variant(std::string_view name);

// Strictly increasing g : [0,1] -> R built from an unconstrained wavelet
// expansion. Immutable; the cumulative integrals over whole panels are
// tabulated at construction so each evaluation only integrates one panel.
class MonotoneFunction {
 public:
  explicit MonotoneFunction(WaveletExpansion omega,
                            MonotoneVariant variant = MonotoneVariant::SingleIntegral,
                            QuadratureConfig quadrature = {}, double c0 = 0.0, double c1 = 1.0);

  // Same transform for an arbitrary integrand omega on [0, 1] (closed-form
  // checks, user-supplied log-derivatives).
  static MonotoneFunction from_integrand(std::function<double(double)> omega,
                                         MonotoneVariant variant = MonotoneVariant::SingleIntegral,
                                         QuadratureConfig quadrature = {}, double c0 = 0.0,
                                         double c1 = 1.0);

  double operator()(double x) const;
  double derivative(double x) const;

  bool has_expansion() const { return expansion_ != nullptr; }
  // Throws DomainError when built from a plain integrand.
  const WaveletExpansion& omega() const;
  MonotoneVariant variant() const { return variant_; }
  const QuadratureConfig& quadrature() const { return rule_->config(); }
  double c0() const { return c0_; }
  double c1() const { return c1_; }

 private:
  // log g'(u) / C1: omega(u), or its antiderivative from 0.
  double exponent(double u) const;
  double exponent_in_panel(std::size_t p, double u) const;

  MonotoneFunction(std::shared_ptr<const WaveletExpansion> expansion,
                   std::function<double(double)> omega, MonotoneVariant variant,
                   const QuadratureConfig& quadrature, double c0, double c1);

  std::shared_ptr<const WaveletExpansion> expansion_;
  std::function<double(double)> omega_;
  MonotoneVariant variant_;
  std::shared_ptr<const PanelRule> rule_;
  double c0_;
  double c1_;
  std::vector<double> omega_cum_;  // int_0^{b_p} omega (DoubleIntegral only)
  std::vector<double> value_cum_;  // int_0^{b_p} exp(exponent)
};

double eval_monotone(const MonotoneFunction& m, double x);
double eval_monotone_derivative(const MonotoneFunction& m, double x);

struct Jacobian {
  Eigen::Matrix2d matrix;
  double det = 0.0;
};

struct InjectivityReport {
  double min_det = 0.0;
  double max_det = 0.0;
  bool sign_changes = false;
};

// Additive bivariate map
//   y1 = g11(x1) + g12(x2)
//   y2 = g21(x1) + g22(x2)
// on the unit square. Component (l, j) maps input axis j into output axis l.
class Deformation {
 public:
  Deformation(MonotoneFunction g11, MonotoneFunction g12, MonotoneFunction g21,
              MonotoneFunction g22);

  // All four expansions share family, level and variant; `coefficients` holds
  // the four flat coefficient blocks in the order g11, g12, g21, g22.
  static Deformation from_coefficients(WaveletFamily family, int max_level,
                                       MonotoneVariant variant, const QuadratureConfig& quadrature,
                                       std::span<const double> coefficients);
  // Identity-like deformation with every omega == 0.
  static Deformation zero(WaveletFamily family, int max_level,
                          MonotoneVariant variant = MonotoneVariant::SingleIntegral,
                          const QuadratureConfig& quadrature = {});

  const MonotoneFunction& component(int output_axis, int input_axis) const;
  const std::array<MonotoneFunction, 4>& components() const { return g_; }

  // Concatenated coefficients g11, g12, g21, g22.
  std::vector<double> coefficients() const;

  Eigen::Vector2d operator()(const Eigen::Vector2d& x) const;
  // Row-wise application to an n x 2 coordinate matrix.
  Eigen::MatrixX2d apply(const Eigen::MatrixX2d& points) const;

 private:
  std::array<MonotoneFunction, 4> g_;
};

Eigen::Vector2d deform(const Deformation& d, const Eigen::Vector2d& x);
Jacobian jacobian(const Deformation& d, const Eigen::Vector2d& x);
InjectivityReport injectivity_report(const Deformation& d, int grid_size);

// Precomputed evaluation of every MonotoneFunction of one axis at a fixed set
// of abscissae, for repeated evaluation under changing coefficients. The
// exponent at each quadrature node is linear in the coefficients, so the
// basis (or its antiderivative) is tabulated once and each evaluation is a
// matrix-vector product followed by exp and a weighted reduction.
// C0 = 0 and C1 = 1 are assumed.
class AxisKernel {
 public:
  AxisKernel(std::span<const double> points, WaveletFamily family, int max_level,
             MonotoneVariant variant, const QuadratureConfig& quadrature);

  std::size_t point_count() const { return panel_of_.size(); }
  std::size_t basis_size() const { return static_cast<std::size_t>(basis_.cols()); }

  // g(points[i]) for the given coefficients.
  void values(std::span<const double> coefficients, Eigen::Ref<Eigen::VectorXd> out) const;
  // Values plus d g(points[i]) / d c_b in `grad` (points x basis).
  void values_and_gradient(std::span<const double> coefficients, Eigen::Ref<Eigen::VectorXd> out,
                           Eigen::Ref<Eigen::MatrixXd> grad) const;

 private:
  std::size_t panels_ = 0;
  std::size_t q_ = 0;
  Eigen::MatrixXd basis_;    // rows: full-panel nodes, then partial-panel nodes per point
  Eigen::VectorXd weights_;
  std::vector<std::size_t> panel_of_;
};

// Deformation of a fixed set of locations as a function of the flat
// coefficient vector; used by the likelihood objective.
class DeformationKernel {
 public:
  DeformationKernel(const Eigen::MatrixX2d& locations, WaveletFamily family, int max_level,
                    MonotoneVariant variant, const QuadratureConfig& quadrature);

  std::size_t coefficient_count() const { return 4 * block_; }
  std::size_t block_size() const { return block_; }
  std::size_t point_count() const { return axis_[0].point_count(); }

  Eigen::MatrixX2d deform(std::span<const double> coefficients) const;
  // Deformed coordinates plus, for each of the four components (g11, g12,
  // g21, g22), the n x block Jacobian of that component's values.
  Eigen::MatrixX2d deform(std::span<const double> coefficients,
                          std::array<Eigen::MatrixXd, 4>& component_grads) const;

 private:
  std::size_t block_;
  std::array<AxisKernel, 2> axis_;
};

}  // namespace wavedeform

#endif  // WAVEDEFORM_MONOTONE_MAP_HPP
