#include "wavedeform/quadrature.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "wavedeform/error.hpp"

namespace wavedeform {

void QuadratureConfig::validate() const {
  if (nodes_per_panel < 2) throw DomainError("quadrature needs at least 2 nodes per panel");
  if (!(panel_width > 0.0) || !std::isfinite(panel_width))
    throw DomainError("quadrature panel width must be positive");
}

PanelRule::PanelRule(const QuadratureConfig& config) : config_(config) {
  config_.validate();

  const auto count = static_cast<std::size_t>(std::ceil(1.0 / config_.panel_width - 1e-9));
  boundaries_.reserve(count + 1);
  for (std::size_t p = 0; p < count; ++p) boundaries_.push_back(p * config_.panel_width);
  boundaries_.push_back(1.0);

  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
      table(gsl_integration_glfixed_table_alloc(config_.nodes_per_panel),
            &gsl_integration_glfixed_table_free);
  if (!table) throw DomainError("cannot build Gauss-Legendre table");
  const auto n = static_cast<std::size_t>(config_.nodes_per_panel);
  ref_nodes_.resize(n);
  ref_weights_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    gsl_integration_glfixed_point(-1.0, 1.0, i, &ref_nodes_[i], &ref_weights_[i], table.get());
}

std::size_t PanelRule::panel_index(double x) const {
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), x);
  auto p = static_cast<std::size_t>(std::distance(boundaries_.begin(), it));
  p = p == 0 ? 0 : p - 1;
  return std::min(p, panel_count() - 1);
}

void PanelRule::map(double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) const {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  nodes.resize(ref_nodes_.size());
  weights.resize(ref_nodes_.size());
  for (std::size_t i = 0; i < ref_nodes_.size(); ++i) {
    nodes[i] = mid + half * ref_nodes_[i];
    weights[i] = half * ref_weights_[i];
  }
}

}  // namespace wavedeform
