#ifndef WAVEDEFORM_IO_HPP
#define WAVEDEFORM_IO_HPP

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wavedeform/covariance_model.hpp"
#include "wavedeform/likelihood_fit.hpp"
#include "wavedeform/monotone_map.hpp"
#include "wavedeform/wavelet_basis.hpp"

namespace wavedeform {

using Json = nlohmann::ordered_json;

// {"family", "J", "c0" (Shannon only), "c": [[level 0], [level 1], ...]}
Json to_json(const WaveletExpansion& e);
WaveletExpansion expansion_from_json(const Json& j);

// {"variant", "quadrature": {...}, "g11", "g12", "g21", "g22" (expansions),
//  "C0": {"g11": ..., ...}, "C1": {...}}. Missing C0/C1 read as 0/1.
Json to_json(const Deformation& d);
Deformation deformation_from_json(const Json& j);

Json to_json(const QuadratureConfig& q);
QuadratureConfig quadrature_from_json(const Json& j);
Json to_json(const CovarianceParams& p);
CovarianceParams params_from_json(const Json& j);

// Non-finite trace entries are written as null and read back as -inf.
Json to_json(const FitResult& r);
FitResult fit_result_from_json(const Json& j);

// Two-space indent, trailing newline.
std::string dump_json(const Json& j);
Json parse_json_file(const std::string& path);

// Shortest decimal that round-trips (at most 17 significant digits).
std::string format_double(double v);

// Header-free, comma-separated, one matrix row per line.
std::string to_csv(const Eigen::MatrixXd& m);
// Throws DataError on a missing file, a non-numeric cell or ragged rows.
Eigen::MatrixXd read_csv(const std::string& path);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::string& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace wavedeform

#endif  // WAVEDEFORM_IO_HPP
