#include "wavedeform/wavelet_basis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

constexpr double kPi = std::numbers::pi;

// 2 / (sqrt(3) pi^{1/4})
const double kMexicanHatNorm = 2.0 / (std::sqrt(3.0) * std::pow(kPi, 0.25));

constexpr int kMaxLevel = 30;

void check_level(int j) {
  if (j < 0 || j > kMaxLevel)
    throw IndexOutOfRange("wavelet level j=" + std::to_string(j) + " outside [0," +
                          std::to_string(kMaxLevel) + "]");
}

}  // namespace

std::string to_string(WaveletFamily family) {
  return family == WaveletFamily::MexicanHat ? "mexican-hat" : "shannon";
}

WaveletFamily parse_family(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '_' || c == ' ' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (s == "mexican-hat" || s == "mexicanhat" || s == "mex") return WaveletFamily::MexicanHat;
  if (s == "shannon" || s == "shan") return WaveletFamily::Shannon;
  throw DomainError("unknown wavelet family '" + std::string(name) + "'");
}

bool has_father(WaveletFamily family) { return family == WaveletFamily::Shannon; }

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  if (std::abs(x) < 1e-4) {
    const double p2 = px * px;
    return 1.0 - p2 / 6.0 + p2 * p2 / 120.0;
  }
  return std::sin(px) / px;
}

double eval_mother(WaveletFamily family, double x) {
  switch (family) {
    case WaveletFamily::MexicanHat: {
      const double x2 = x * x;
      return kMexicanHatNorm * (1.0 - x2) * std::exp(-0.5 * x2);
    }
    case WaveletFamily::Shannon:
      return 2.0 * sinc(2.0 * x) - sinc(x);
  }
  return 0.0;
}

double eval_father(WaveletFamily family, double x) {
  if (!has_father(family)) throw FamilyHasNoFather();
  return sinc(x);
}

double eval_dilated(WaveletFamily family, int j, int k, double x, WaveletKind kind) {
  check_level(j);
  const long long count = 1LL << j;
  if (k < 0 || k >= count)
    throw IndexOutOfRange("translation k=" + std::to_string(k) + " outside [0," +
                          std::to_string(count - 1) + "] at level " + std::to_string(j));
  const double scale = std::ldexp(1.0, j);
  const double arg = scale * x - k;
  const double amp = std::sqrt(scale);
  return amp * (kind == WaveletKind::Mother ? eval_mother(family, arg) : eval_father(family, arg));
}

std::size_t expansion_size(WaveletFamily family, int max_level) {
  check_level(max_level);
  const std::size_t details = (std::size_t{1} << (max_level + 1)) - 1;
  return details + (has_father(family) ? 1 : 0);
}

WaveletExpansion::WaveletExpansion(WaveletFamily family, int max_level)
    : family_(family), max_level_(max_level), coeffs_(expansion_size(family, max_level), 0.0) {}

WaveletExpansion::WaveletExpansion(WaveletFamily family, int max_level,
                                   std::vector<double> coefficients)
    : family_(family), max_level_(max_level), coeffs_(std::move(coefficients)) {
  const std::size_t expected = expansion_size(family, max_level);
  if (coeffs_.size() != expected)
    throw DomainError("wavelet expansion expects " + std::to_string(expected) +
                      " coefficients, got " + std::to_string(coeffs_.size()));
  for (double c : coeffs_)
    if (!std::isfinite(c)) throw DomainError("wavelet coefficient is not finite");
}

double WaveletExpansion::father_coeff() const {
  if (!has_father(family_)) throw FamilyHasNoFather();
  return coeffs_[0];
}

void WaveletExpansion::set_father_coeff(double value) {
  if (!has_father(family_)) throw FamilyHasNoFather();
  coeffs_[0] = value;
}

std::size_t WaveletExpansion::detail_index(int j, int k) const {
  if (j < 0 || j > max_level_)
    throw IndexOutOfRange("level j=" + std::to_string(j) + " outside [0," +
                          std::to_string(max_level_) + "]");
  if (k < 0 || k >= (1 << j))
    throw IndexOutOfRange("translation k=" + std::to_string(k) + " outside level " +
                          std::to_string(j));
  return (has_father(family_) ? 1 : 0) + static_cast<std::size_t>((1 << j) - 1 + k);
}

double WaveletExpansion::detail_coeff(int j, int k) const { return coeffs_[detail_index(j, k)]; }

void WaveletExpansion::set_detail_coeff(int j, int k, double value) {
  coeffs_[detail_index(j, k)] = value;
}

void WaveletExpansion::basis_values(double x, std::span<double> out) const {
  std::size_t i = 0;
  if (has_father(family_)) out[i++] = sinc(x);
  for (int j = 0; j <= max_level_; ++j) {
    const double scale = std::ldexp(1.0, j);
    const double amp = std::sqrt(scale);
    const double base = scale * x;
    for (int k = 0; k < (1 << j); ++k) out[i++] = amp * eval_mother(family_, base - k);
  }
}

double WaveletExpansion::operator()(double x) const {
  double sum = 0.0;
  std::size_t i = 0;
  if (has_father(family_)) sum += coeffs_[i++] * sinc(x);
  for (int j = 0; j <= max_level_; ++j) {
    const double scale = std::ldexp(1.0, j);
    const double amp = std::sqrt(scale);
    const double base = scale * x;
    for (int k = 0; k < (1 << j); ++k, ++i) {
      if (coeffs_[i] != 0.0) sum += coeffs_[i] * amp * eval_mother(family_, base - k);
    }
  }
  return sum;
}

double eval_expansion(const WaveletExpansion& e, double x) { return e(x); }

}  // namespace wavedeform
