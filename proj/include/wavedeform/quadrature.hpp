#ifndef WAVEDEFORM_QUADRATURE_HPP
#define WAVEDEFORM_QUADRATURE_HPP

#include <cstddef>
#include <vector>

namespace wavedeform {

struct QuadratureConfig {
  int nodes_per_panel = 32;
  double panel_width = 0.05;

  void validate() const;
  bool operator==(const QuadratureConfig&) const = default;
};

// Composite Gauss-Legendre rule on [0, 1] with panels anchored at 0:
// [0, h], [h, 2h], ..., the last one clipped at 1. An integral over [0, x]
// is the sum of the full panels below x plus one partial panel [b_p, x]
// integrated with the same node count.
class PanelRule {
 public:
  explicit PanelRule(const QuadratureConfig& config);

  const QuadratureConfig& config() const { return config_; }
  int nodes_per_panel() const { return config_.nodes_per_panel; }
  std::size_t panel_count() const { return boundaries_.size() - 1; }
  // b_0 = 0 < b_1 < ... < b_P = 1
  const std::vector<double>& boundaries() const { return boundaries_; }

  // Largest p with boundaries()[p] <= x (clamped to panel_count() - 1 only
  // when x == 1 lands exactly on the last boundary, in which case the partial
  // panel is the whole last panel).
  std::size_t panel_index(double x) const;

  // Nodes and weights mapped onto [a, b].
  void map(double a, double b, std::vector<double>& nodes, std::vector<double>& weights) const;

  // Nodes/weights on the reference interval [-1, 1].
  const std::vector<double>& ref_nodes() const { return ref_nodes_; }
  const std::vector<double>& ref_weights() const { return ref_weights_; }

  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < ref_nodes_.size(); ++i)
      sum += (half * ref_weights_[i]) * f(mid + half * ref_nodes_[i]);
    return sum;
  }

 private:
  QuadratureConfig config_;
  std::vector<double> boundaries_;
  std::vector<double> ref_nodes_;
  std::vector<double> ref_weights_;
};

}  // namespace wavedeform

#endif  // WAVEDEFORM_QUADRATURE_HPP
