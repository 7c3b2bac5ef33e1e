#ifndef WAVEDEFORM_WAVELET_BASIS_HPP
#define WAVEDEFORM_WAVELET_BASIS_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wavedeform {

enum class WaveletFamily { MexicanHat, Shannon };

enum class WaveletKind { Mother, Father };

std::string to_string(WaveletFamily family);
// Accepts "mexican-hat" / "shannon" (case-insensitive, '_' or '-').
WaveletFamily parse_family(std::string_view name);

bool has_father(WaveletFamily family);

// sin(pi x) / (pi x), with the removable singularity filled in.
double sinc(double x);

double eval_mother(WaveletFamily family, double x);
double eval_father(WaveletFamily family, double x);

// 2^{j/2} psi(2^j x - k) (or phi), for 0 <= k < 2^j.
double eval_dilated(WaveletFamily family, int j, int k, double x,
                    WaveletKind kind = WaveletKind::Mother);

// Number of coefficients of an expansion up to level `max_level`, including the
// father coefficient when the family has one.
std::size_t expansion_size(WaveletFamily family, int max_level);

// Finite expansion
//   omega(x) = c0 phi(x) + sum_{j=0}^{J} sum_{k=0}^{2^j-1} c_{j,k} psi_{j,k}(x)
// (the father term only for Shannon).
//
// Coefficients are stored flat: father first, then level-major /
// translation-minor. That ordering is also the optimizer's parameter layout.
class WaveletExpansion {
 public:
  WaveletExpansion(WaveletFamily family, int max_level);
  WaveletExpansion(WaveletFamily family, int max_level, std::vector<double> coefficients);

  WaveletFamily family() const { return family_; }
  int max_level() const { return max_level_; }

  std::span<const double> coefficients() const { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  double father_coeff() const;
  void set_father_coeff(double value);
  double detail_coeff(int j, int k) const;
  void set_detail_coeff(int j, int k, double value);

  // omega(x)
  double operator()(double x) const;

  // Values of each basis function at x, in storage order. omega(x) is the dot
  // product of this with coefficients().
  void basis_values(double x, std::span<double> out) const;

 private:
  std::size_t detail_index(int j, int k) const;

  WaveletFamily family_;
  int max_level_;
  std::vector<double> coeffs_;
};

double eval_expansion(const WaveletExpansion& e, double x);

}  // namespace wavedeform

#endif  // WAVEDEFORM_WAVELET_BASIS_HPP
