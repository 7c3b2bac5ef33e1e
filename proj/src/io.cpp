#include "wavedeform/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

constexpr const char* kComponentNames[4] = {"g11", "g12", "g21", "g22"};

Json points_to_json(const Eigen::MatrixX2d& p) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < p.rows(); ++i) a.push_back({p(i, 0), p(i, 1)});
  return a;
}

Eigen::MatrixX2d points_from_json(const Json& a) {
  Eigen::MatrixX2d p(static_cast<Eigen::Index>(a.size()), 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    p(static_cast<Eigen::Index>(i), 0) = a.at(i).at(0).get<double>();
    p(static_cast<Eigen::Index>(i), 1) = a.at(i).at(1).get<double>();
  }
  return p;
}

double finite_or_neg_inf(const Json& v) {
  return v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>();
}

}  // namespace

Json to_json(const WaveletExpansion& e) {
  Json j;
  j["family"] = to_string(e.family());
  j["J"] = e.max_level();
  if (has_father(e.family())) j["c0"] = e.father_coeff();
  Json levels = Json::array();
  for (int lvl = 0; lvl <= e.max_level(); ++lvl) {
    Json row = Json::array();
    for (int k = 0; k < (1 << lvl); ++k) row.push_back(e.detail_coeff(lvl, k));
    levels.push_back(std::move(row));
  }
  j["c"] = std::move(levels);
  return j;
}

WaveletExpansion expansion_from_json(const Json& j) {
  try {
    WaveletExpansion e(parse_family(j.at("family").get<std::string>()), j.at("J").get<int>());
    if (has_father(e.family()))
      e.set_father_coeff(j.at("c0").get<double>());
    else if (j.contains("c0"))
      throw DataError("expansion JSON: c0 given for a family without a father function");
    const Json& levels = j.at("c");
    if (levels.size() != static_cast<std::size_t>(e.max_level() + 1))
      throw DataError("expansion JSON: expected " + std::to_string(e.max_level() + 1) + " levels");
    for (int lvl = 0; lvl <= e.max_level(); ++lvl) {
      const Json& row = levels.at(static_cast<std::size_t>(lvl));
      if (row.size() != static_cast<std::size_t>(1 << lvl))
        throw DataError("expansion JSON: level " + std::to_string(lvl) + " has wrong length");
      for (int k = 0; k < (1 << lvl); ++k)
        e.set_detail_coeff(lvl, k, row.at(static_cast<std::size_t>(k)).get<double>());
    }
    return e;
  } catch (const Json::exception& ex) {
    throw DataError(std::string("expansion JSON: ") + ex.what());
  }
}

Json to_json(const QuadratureConfig& q) {
  Json j;
  j["nodes_per_panel"] = q.nodes_per_panel;
  j["panel_width"] = q.panel_width;
  return j;
}

QuadratureConfig quadrature_from_json(const Json& j) {
  QuadratureConfig q;
  q.nodes_per_panel = j.at("nodes_per_panel").get<int>();
  q.panel_width = j.at("panel_width").get<double>();
  q.validate();
  return q;
}

Json to_json(const Deformation& d) {
  const MonotoneFunction& first = d.component(1, 1);
  Json j;
  j["variant"] = to_string(first.variant());
  j["quadrature"] = to_json(first.quadrature());
  Json c0, c1;
  for (int i = 0; i < 4; ++i) {
    const MonotoneFunction& g = d.components()[static_cast<std::size_t>(i)];
    j[kComponentNames[i]] = to_json(g.omega());
    c0[kComponentNames[i]] = g.c0();
    c1[kComponentNames[i]] = g.c1();
  }
  j["C0"] = std::move(c0);
  j["C1"] = std::move(c1);
  return j;
}

Deformation deformation_from_json(const Json& j) {
  try {
    const MonotoneVariant variant = parse_variant(j.at("variant").get<std::string>());
    const QuadratureConfig quad = quadrature_from_json(j.at("quadrature"));
    auto make = [&](const char* name) {
      const double c0 = j.contains("C0") ? j["C0"].at(name).get<double>() : 0.0;
      const double c1 = j.contains("C1") ? j["C1"].at(name).get<double>() : 1.0;
      return MonotoneFunction(expansion_from_json(j.at(name)), variant, quad, c0, c1);
    };
    return Deformation(make("g11"), make("g12"), make("g21"), make("g22"));
  } catch (const Json::exception& ex) {
    throw DataError(std::string("deformation JSON: ") + ex.what());
  }
}

Json to_json(const CovarianceParams& p) {
  Json j;
  j["nu"] = p.nu;
  j["theta"] = p.theta;
  j["nugget"] = p.nugget;
  return j;
}

CovarianceParams params_from_json(const Json& j) {
  CovarianceParams p;
  p.nu = j.at("nu").get<double>();
  p.theta = j.at("theta").get<double>();
  p.nugget = j.at("nugget").get<double>();
  return p;
}

Json to_json(const FitResult& r) {
  Json j;
  j["family"] = to_string(r.family);
  j["J"] = r.J;
  j["variant"] = to_string(r.variant);
  j["quadrature"] = to_json(r.quadrature);
  j["params"] = to_json(r.params);
  j["loglik"] = r.loglik;
  j["mse"] = r.mse;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["restart"] = r.restart;
  j["scale"] = r.scale;
  j["coefficients"] = r.coefficients;
  j["deformation"] = to_json(r.deformation());
  Json trace = Json::array();
  for (double v : r.loglik_trace) trace.push_back(std::isfinite(v) ? Json(v) : Json(nullptr));
  j["loglik_trace"] = std::move(trace);
  j["deformed_coords"] = points_to_json(r.deformed_coords);
  j["aligned_coords"] = points_to_json(r.aligned_coords);
  j["warnings"] = r.warnings;
  return j;
}

FitResult fit_result_from_json(const Json& j) {
  try {
    FitResult r;
    r.family = parse_family(j.at("family").get<std::string>());
    r.J = j.at("J").get<int>();
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.quadrature = quadrature_from_json(j.at("quadrature"));
    r.params = params_from_json(j.at("params"));
    r.loglik = finite_or_neg_inf(j.at("loglik"));
    r.mse = j.at("mse").get<double>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<int>();
    r.restart = j.at("restart").get<int>();
    r.scale = j.at("scale").get<double>();
    r.coefficients = j.at("coefficients").get<std::vector<double>>();
    for (const Json& v : j.at("loglik_trace")) r.loglik_trace.push_back(finite_or_neg_inf(v));
    r.deformed_coords = points_from_json(j.at("deformed_coords"));
    r.aligned_coords = points_from_json(j.at("aligned_coords"));
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const Json::exception& ex) {
    throw DataError(std::string("fit result JSON: ") + ex.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& ex) {
    throw DataError(path + ": " + ex.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

std::string to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(i, c));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                             : comma - start);
      double v = 0.0;
      const char* b = cell.data();
      const char* e = cell.data() + cell.size();
      while (b < e && *b == ' ') ++b;
      const auto [ptr, ec] = std::from_chars(b, e, v);
      if (b == e || ec != std::errc() || ptr != e)
        throw DataError(path + ": non-numeric cell '" + cell + "'", line_no);
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InconsistentLength(path + ": ragged row", line_no);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": empty CSV");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace wavedeform
