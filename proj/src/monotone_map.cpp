#include "wavedeform/monotone_map.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError(std::string(what) + ": argument " + std::to_string(x) +
                      " outside [0, 1]");
}

void check_unit_square(const Eigen::Vector2d& x, const char* what) {
  if (!(x(0) >= 0.0 && x(0) <= 1.0 && x(1) >= 0.0 && x(1) <= 1.0))
    throw DomainError(std::string(what) + ": point outside the unit square");
}

}  // namespace

std::string to_string(MonotoneVariant variant) {
  return variant == MonotoneVariant::SingleIntegral ? "single" : "double";
}

MonotoneVariant parse_variant(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "single" || s == "singleintegral" || s == "single-integral")
    return MonotoneVariant::SingleIntegral;
  if (s == "double" || s == "doubleintegral" || s == "double-integral")
    return MonotoneVariant::DoubleIntegral;
  throw DomainError("unknown monotone variant '" + std::string(name) + "'");
}

// --- MonotoneFunction -------------------------------------------------------

MonotoneFunction::MonotoneFunction(WaveletExpansion omega, MonotoneVariant variant,
                                   QuadratureConfig quadrature, double c0, double c1)
    : MonotoneFunction(std::make_shared<const WaveletExpansion>(std::move(omega)), nullptr,
                       variant, quadrature, c0, c1) {}

MonotoneFunction MonotoneFunction::from_integrand(std::function<double(double)> omega,
                                                  MonotoneVariant variant,
                                                  QuadratureConfig quadrature, double c0,
                                                  double c1) {
  if (!omega) throw DomainError("integrand must be callable");
  return MonotoneFunction(nullptr, std::move(omega), variant, quadrature, c0, c1);
}

const WaveletExpansion& MonotoneFunction::omega() const {
  if (!expansion_) throw DomainError("monotone function was not built from a wavelet expansion");
  return *expansion_;
}

MonotoneFunction::MonotoneFunction(std::shared_ptr<const WaveletExpansion> expansion,
                                   std::function<double(double)> omega, MonotoneVariant variant,
                                   const QuadratureConfig& quadrature, double c0, double c1)
    : expansion_(std::move(expansion)),
      omega_(expansion_ ? [e = expansion_](double x) { return (*e)(x); } : std::move(omega)),
      variant_(variant),
      rule_(std::make_shared<const PanelRule>(quadrature)),
      c0_(c0),
      c1_(c1) {
  if (!std::isfinite(c0_)) throw DomainError("C0 must be finite");
  if (!(c1_ > 0.0) || !std::isfinite(c1_)) throw DomainError("C1 must be positive");

  const auto& b = rule_->boundaries();
  const std::size_t panels = rule_->panel_count();
  if (variant_ == MonotoneVariant::DoubleIntegral) {
    omega_cum_.assign(panels + 1, 0.0);
    for (std::size_t p = 0; p < panels; ++p)
      omega_cum_[p + 1] = omega_cum_[p] + rule_->integrate(omega_, b[p], b[p + 1]);
  }
  value_cum_.assign(panels + 1, 0.0);
  for (std::size_t p = 0; p < panels; ++p) {
    const double panel = rule_->integrate(
        [&](double u) { return std::exp(exponent_in_panel(p, u)); }, b[p], b[p + 1]);
    value_cum_[p + 1] = value_cum_[p] + panel;
  }
}

double MonotoneFunction::exponent_in_panel(std::size_t p, double u) const {
  if (variant_ == MonotoneVariant::SingleIntegral) return omega_(u);
  const double start = rule_->boundaries()[p];
  return omega_cum_[p] + rule_->integrate(omega_, start, u);
}

double MonotoneFunction::exponent(double u) const {
  return exponent_in_panel(rule_->panel_index(u), u);
}

double MonotoneFunction::operator()(double x) const {
  check_unit(x, "eval_monotone");
  const std::size_t p = rule_->panel_index(x);
  const double start = rule_->boundaries()[p];
  const double partial =
      rule_->integrate([&](double u) { return std::exp(exponent_in_panel(p, u)); }, start, x);
  return c0_ + c1_ * (value_cum_[p] + partial);
}

double MonotoneFunction::derivative(double x) const {
  check_unit(x, "eval_monotone_derivative");
  return c1_ * std::exp(exponent(x));
}

double eval_monotone(const MonotoneFunction& m, double x) { return m(x); }

double eval_monotone_derivative(const MonotoneFunction& m, double x) { return m.derivative(x); }

// --- Deformation ------------------------------------------------------------

Deformation::Deformation(MonotoneFunction g11, MonotoneFunction g12, MonotoneFunction g21,
                         MonotoneFunction g22)
    : g_{std::move(g11), std::move(g12), std::move(g21), std::move(g22)} {}

Deformation Deformation::from_coefficients(WaveletFamily family, int max_level,
                                           MonotoneVariant variant,
                                           const QuadratureConfig& quadrature,
                                           std::span<const double> coefficients) {
  const std::size_t block = expansion_size(family, max_level);
  if (coefficients.size() != 4 * block)
    throw DomainError("deformation expects " + std::to_string(4 * block) +
                      " coefficients, got " + std::to_string(coefficients.size()));
  auto make = [&](std::size_t i) {
    auto part = coefficients.subspan(i * block, block);
    return MonotoneFunction(
        WaveletExpansion(family, max_level, std::vector<double>(part.begin(), part.end())),
        variant, quadrature);
  };
  return Deformation(make(0), make(1), make(2), make(3));
}

Deformation Deformation::zero(WaveletFamily family, int max_level, MonotoneVariant variant,
                              const QuadratureConfig& quadrature) {
  std::vector<double> c(4 * expansion_size(family, max_level), 0.0);
  return from_coefficients(family, max_level, variant, quadrature, c);
}

const MonotoneFunction& Deformation::component(int output_axis, int input_axis) const {
  if (output_axis < 1 || output_axis > 2 || input_axis < 1 || input_axis > 2)
    throw IndexOutOfRange("deformation component indices are 1-based in {1, 2}");
  return g_[static_cast<std::size_t>(2 * (output_axis - 1) + (input_axis - 1))];
}

std::vector<double> Deformation::coefficients() const {
  std::vector<double> out;
  for (const auto& g : g_) {
    auto c = g.omega().coefficients();
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

Eigen::Vector2d Deformation::operator()(const Eigen::Vector2d& x) const {
  check_unit_square(x, "deform");
  return {g_[0](x(0)) + g_[1](x(1)), g_[2](x(0)) + g_[3](x(1))};
}

Eigen::MatrixX2d Deformation::apply(const Eigen::MatrixX2d& points) const {
  Eigen::MatrixX2d out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    out.row(i) = (*this)(points.row(i).transpose()).transpose();
  return out;
}

Eigen::Vector2d deform(const Deformation& d, const Eigen::Vector2d& x) { return d(x); }

Jacobian jacobian(const Deformation& d, const Eigen::Vector2d& x) {
  check_unit_square(x, "jacobian");
  const auto& g = d.components();
  Jacobian j;
  j.matrix << g[0].derivative(x(0)), g[1].derivative(x(1)), g[2].derivative(x(0)),
      g[3].derivative(x(1));
  j.det = j.matrix(0, 0) * j.matrix(1, 1) - j.matrix(0, 1) * j.matrix(1, 0);
  return j;
}

InjectivityReport injectivity_report(const Deformation& d, int grid_size) {
  if (grid_size < 2) throw DomainError("injectivity_report needs grid_size >= 2");
  InjectivityReport r;
  r.min_det = std::numeric_limits<double>::infinity();
  r.max_det = -std::numeric_limits<double>::infinity();
  bool seen_pos = false;
  bool seen_neg = false;
  for (int a = 0; a < grid_size; ++a) {
    for (int b = 0; b < grid_size; ++b) {
      const Eigen::Vector2d x(static_cast<double>(a) / (grid_size - 1),
                              static_cast<double>(b) / (grid_size - 1));
      const double det = jacobian(d, x).det;
      r.min_det = std::min(r.min_det, det);
      r.max_det = std::max(r.max_det, det);
      seen_pos |= det > 0.0;
      seen_neg |= det < 0.0;
    }
  }
  r.sign_changes = seen_pos && seen_neg;
  return r;
}

// --- AxisKernel -------------------------------------------------------------

AxisKernel::AxisKernel(std::span<const double> points, WaveletFamily family, int max_level,
                       MonotoneVariant variant, const QuadratureConfig& quadrature) {
  const PanelRule rule(quadrature);
  const auto& b = rule.boundaries();
  panels_ = rule.panel_count();
  q_ = static_cast<std::size_t>(rule.nodes_per_panel());
  const std::size_t nb = expansion_size(family, max_level);
  const WaveletExpansion shape(family, max_level);

  panel_of_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_unit(points[i], "AxisKernel");
    panel_of_[i] = rule.panel_index(points[i]);
  }

  const std::size_t rows = (panels_ + points.size()) * q_;
  basis_.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(nb));
  weights_.resize(static_cast<Eigen::Index>(rows));

  std::vector<double> row(nb);
  auto basis_at = [&](double u, std::span<double> out) { shape.basis_values(u, out); };

  // Antiderivative of every basis function at the panel boundaries.
  Eigen::MatrixXd anti_cum;
  std::vector<double> nodes, w, inner_nodes, inner_w;
  if (variant == MonotoneVariant::DoubleIntegral) {
    anti_cum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(panels_ + 1),
                                     static_cast<Eigen::Index>(nb));
    for (std::size_t p = 0; p < panels_; ++p) {
      rule.map(b[p], b[p + 1], nodes, w);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
      for (std::size_t k = 0; k < q_; ++k) {
        basis_at(nodes[k], row);
        for (std::size_t c = 0; c < nb; ++c) acc(static_cast<Eigen::Index>(c)) += w[k] * row[c];
      }
      anti_cum.row(static_cast<Eigen::Index>(p + 1)) =
          anti_cum.row(static_cast<Eigen::Index>(p)) + acc.transpose();
    }
  }

  auto fill_panel = [&](std::size_t first_row, std::size_t p, double a, double end) {
    rule.map(a, end, nodes, w);
    for (std::size_t k = 0; k < q_; ++k) {
      const auto r = static_cast<Eigen::Index>(first_row + k);
      weights_(r) = w[k];
      if (variant == MonotoneVariant::SingleIntegral) {
        basis_at(nodes[k], row);
        for (std::size_t c = 0; c < nb; ++c) basis_(r, static_cast<Eigen::Index>(c)) = row[c];
      } else {
        basis_.row(r) = anti_cum.row(static_cast<Eigen::Index>(p));
        rule.map(b[p], nodes[k], inner_nodes, inner_w);
        for (std::size_t m = 0; m < q_; ++m) {
          basis_at(inner_nodes[m], row);
          for (std::size_t c = 0; c < nb; ++c)
            basis_(r, static_cast<Eigen::Index>(c)) += inner_w[m] * row[c];
        }
      }
    }
  };

  for (std::size_t p = 0; p < panels_; ++p) fill_panel(p * q_, p, b[p], b[p + 1]);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const std::size_t p = panel_of_[i];
    fill_panel((panels_ + i) * q_, p, b[p], points[i]);
  }
}

void AxisKernel::values(std::span<const double> coefficients,
                        Eigen::Ref<Eigen::VectorXd> out) const {
  const Eigen::Map<const Eigen::VectorXd> c(coefficients.data(),
                                            static_cast<Eigen::Index>(coefficients.size()));
  const Eigen::VectorXd f = weights_.array() * (basis_ * c).array().exp();
  std::vector<double> cum(panels_ + 1, 0.0);
  for (std::size_t p = 0; p < panels_; ++p)
    cum[p + 1] = cum[p] + f.segment(static_cast<Eigen::Index>(p * q_),
                                    static_cast<Eigen::Index>(q_)).sum();
  for (std::size_t i = 0; i < panel_of_.size(); ++i) {
    const auto start = static_cast<Eigen::Index>((panels_ + i) * q_);
    out(static_cast<Eigen::Index>(i)) =
        cum[panel_of_[i]] + f.segment(start, static_cast<Eigen::Index>(q_)).sum();
  }
}

void AxisKernel::values_and_gradient(std::span<const double> coefficients,
                                     Eigen::Ref<Eigen::VectorXd> out,
                                     Eigen::Ref<Eigen::MatrixXd> grad) const {
  const Eigen::Map<const Eigen::VectorXd> c(coefficients.data(),
                                            static_cast<Eigen::Index>(coefficients.size()));
  const Eigen::VectorXd f = weights_.array() * (basis_ * c).array().exp();
  const auto q = static_cast<Eigen::Index>(q_);
  const auto nb = basis_.cols();

  std::vector<double> cum(panels_ + 1, 0.0);
  Eigen::MatrixXd cum_grad = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(panels_ + 1), nb);
  for (std::size_t p = 0; p < panels_; ++p) {
    const auto start = static_cast<Eigen::Index>(p * q_);
    cum[p + 1] = cum[p] + f.segment(start, q).sum();
    cum_grad.row(static_cast<Eigen::Index>(p + 1)) =
        cum_grad.row(static_cast<Eigen::Index>(p)) +
        f.segment(start, q).transpose() * basis_.middleRows(start, q);
  }
  for (std::size_t i = 0; i < panel_of_.size(); ++i) {
    const auto start = static_cast<Eigen::Index>((panels_ + i) * q_);
    const auto ii = static_cast<Eigen::Index>(i);
    const auto p = static_cast<Eigen::Index>(panel_of_[i]);
    out(ii) = cum[panel_of_[i]] + f.segment(start, q).sum();
    grad.row(ii) = cum_grad.row(p) + f.segment(start, q).transpose() * basis_.middleRows(start, q);
  }
}

// --- DeformationKernel ------------------------------------------------------

namespace {

std::vector<double> column(const Eigen::MatrixX2d& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, c);
  return out;
}

}  // namespace

DeformationKernel::DeformationKernel(const Eigen::MatrixX2d& locations, WaveletFamily family,
                                     int max_level, MonotoneVariant variant,
                                     const QuadratureConfig& quadrature)
    : block_(expansion_size(family, max_level)),
      axis_{AxisKernel(column(locations, 0), family, max_level, variant, quadrature),
            AxisKernel(column(locations, 1), family, max_level, variant, quadrature)} {}

Eigen::MatrixX2d DeformationKernel::deform(std::span<const double> coefficients) const {
  if (coefficients.size() != coefficient_count())
    throw DomainError("coefficient vector has wrong length");
  const auto n = static_cast<Eigen::Index>(point_count());
  Eigen::MatrixX2d y(n, 2);
  Eigen::VectorXd tmp(n);
  for (int l = 0; l < 2; ++l) {
    axis_[0].values(coefficients.subspan((2 * l) * block_, block_), y.col(l));
    axis_[1].values(coefficients.subspan((2 * l + 1) * block_, block_), tmp);
    y.col(l) += tmp;
  }
  return y;
}

Eigen::MatrixX2d DeformationKernel::deform(std::span<const double> coefficients,
                                           std::array<Eigen::MatrixXd, 4>& component_grads) const {
  if (coefficients.size() != coefficient_count())
    throw DomainError("coefficient vector has wrong length");
  const auto n = static_cast<Eigen::Index>(point_count());
  const auto nb = static_cast<Eigen::Index>(block_);
  Eigen::MatrixX2d y(n, 2);
  Eigen::VectorXd tmp(n);
  for (auto& g : component_grads) g.resize(n, nb);
  for (int l = 0; l < 2; ++l) {
    axis_[0].values_and_gradient(coefficients.subspan((2 * l) * block_, block_), y.col(l),
                                 component_grads[static_cast<std::size_t>(2 * l)]);
    axis_[1].values_and_gradient(coefficients.subspan((2 * l + 1) * block_, block_), tmp,
                                 component_grads[static_cast<std::size_t>(2 * l + 1)]);
    y.col(l) += tmp;
  }
  return y;
}

}  // namespace wavedeform
