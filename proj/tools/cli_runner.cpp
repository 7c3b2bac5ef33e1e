#include "cli_runner.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wavedeform/error.hpp"
#include "wavedeform/ghcn_ingest.hpp"
#include "wavedeform/gp_simulator.hpp"
#include "wavedeform/io.hpp"
#include "wavedeform/likelihood_fit.hpp"

#ifndef WAVEDEFORM_VERSION
#define WAVEDEFORM_VERSION "0.0.0"
#endif

namespace wavedeform::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutEnv = "WAVEDEFORM_OUT";

// Collects the artifacts of one run and writes them together. If any write
// fails the files already written are removed.
class ArtifactSet {
 public:
  explicit ArtifactSet(fs::path dir) : dir_(std::move(dir)) {}

  void add(const std::string& name, std::string content) {
    files_.emplace_back(name, std::move(content));
  }

  Json hashes() const {
    Json j = Json::object();
    for (const auto& [name, content] : files_) j[name] = hex64(fnv1a64(content));
    return j;
  }

  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path p = dir_ / name;
        atomic_write(p.string(), content);
        written.push_back(p);
      }
    } catch (...) {
      std::error_code ec;
      for (const fs::path& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Common {
  std::string out;
  int threads = 1;
  bool timing = false;
};

fs::path resolve_out(const Common& c, const std::string& subcommand) {
  if (!c.out.empty()) return c.out;
  if (const char* root = std::getenv(kOutEnv); root && *root) return fs::path(root) / subcommand;
  throw CLI::ValidationError("--out", std::string("no output directory; pass --out or set ") +
                                          kOutEnv);
}

// Identity of a run: everything that determines its artifacts.
Json make_manifest(const std::string& subcommand, const Json& config, const Json& inputs,
                   std::uint64_t seed) {
  Json m;
  m["tool"] = "wavedeform";
  m["version"] = WAVEDEFORM_VERSION;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["inputs"] = inputs;
  m["seed"] = seed;
  m["run_id"] = hex64(fnv1a64(m.dump()));
  return m;
}

void finish_manifest(Json& manifest, const ArtifactSet& artifacts, bool timing,
                     std::chrono::steady_clock::time_point start) {
  manifest["outputs"] = artifacts.hashes();
  if (timing)
    manifest["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string round5(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f", v);
  std::string s(buf);
  if (s == "-0.00000") s = "0.00000";
  return s;
}

SpatioTemporalDataSet load_dataset(const fs::path& dir) {
  SpatioTemporalDataSet data;
  const Eigen::MatrixXd loc = read_csv((dir / "locations.csv").string());
  if (loc.cols() != 2) throw DataError("locations.csv must have two columns");
  data.locations = loc;
  data.observations = read_csv((dir / "observations.csv").string());
  if (data.observations.rows() != data.locations.rows())
    throw InconsistentLength("locations.csv and observations.csv disagree on the number of sites");
  data.validate();
  return data;
}

// --- fit options shared by `fit` and `simulate --fit` --------------------------

struct FitOptions {
  std::string variant = "single";
  std::uint64_t seed = 1;
  int restarts = 1;
  int max_iters = 100;
  double init_scale = 0.1;
  bool finite_difference = false;
  double fixed_nugget = -1.0;  // < 0: fit the nugget
};

void add_fit_options(CLI::App* app, FitOptions& f, const std::string& seed_flag) {
  app->add_option("--variant", f.variant, "Monotone variant: single | double")
      ->capture_default_str();
  app->add_option(seed_flag, f.seed, "Seed for the coefficient initialization")
      ->capture_default_str();
  app->add_option("--restarts", f.restarts, "Independent restarts; best log-likelihood wins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--max-iters", f.max_iters, "Outer alternating iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app->add_option("--init-scale", f.init_scale, "Spread of random initial coefficients")
      ->capture_default_str();
  app->add_flag("--fd", f.finite_difference, "Finite-difference gradients in the c-step");
  app->add_option("--fixed-nugget", f.fixed_nugget, "Hold the nugget at this value");
}

FitConfig make_fit_config(const FitOptions& f, WaveletFamily family, int J, int threads) {
  FitConfig c;
  c.family = family;
  c.J = J;
  c.variant = parse_variant(f.variant);
  c.init_seed = f.seed;
  c.init_scale = f.init_scale;
  c.restarts = f.restarts;
  c.outer_max_iters = f.max_iters;
  c.coeff_optimizer.finite_difference = f.finite_difference;
  if (f.fixed_nugget >= 0.0) {
    c.fit_nugget = false;
    c.fixed_nugget = f.fixed_nugget;
  }
  c.threads = threads;
  c.validate();
  return c;
}

Json fit_options_json(const FitOptions& f) {
  Json j;
  j["variant"] = f.variant;
  j["restarts"] = f.restarts;
  j["max_iters"] = f.max_iters;
  j["init_scale"] = f.init_scale;
  j["finite_difference"] = f.finite_difference;
  if (f.fixed_nugget >= 0.0) j["fixed_nugget"] = f.fixed_nugget;
  return j;
}

// --- simulate -------------------------------------------------------------------

struct SimulateOptions {
  std::string kind;
  int n = 50;
  int T = 2048;
  std::uint64_t seed = 1;
  double nu = 1.0;
  double theta = 0.25;
  double nugget = 0.05;
  int grid = 0;
  std::vector<std::string> fits;
  int replicates = 1;
  FitOptions fit;
};

std::pair<WaveletFamily, int> parse_family_level(const std::string& spec) {
  const auto colon = spec.rfind(':');
  if (colon == std::string::npos)
    throw CLI::ValidationError("--fit", "expected family:J, got '" + spec + "'");
  int J = 0;
  try {
    std::size_t used = 0;
    J = std::stoi(spec.substr(colon + 1), &used);
    if (used != spec.size() - colon - 1) throw std::invalid_argument("J");
  } catch (const std::exception&) {
    throw CLI::ValidationError("--fit", "bad level in '" + spec + "'");
  }
  return {parse_family(spec.substr(0, colon)), J};
}

int cmd_simulate(const SimulateOptions& o, const Common& common, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioSpec spec;
  spec.kind = parse_scenario(o.kind);
  spec.n = o.n;
  spec.T = o.T;
  spec.seed = o.seed;
  spec.params = {o.nu, o.theta, o.nugget};
  spec.validate();
  std::vector<std::pair<WaveletFamily, int>> fits;
  for (const std::string& f : o.fits) fits.push_back(parse_family_level(f));
  if (o.replicates < 1) throw CLI::ValidationError("--replicates", "must be at least 1");
  const fs::path dir = resolve_out(common, "simulate");

  Json config;
  config["kind"] = to_string(spec.kind);
  config["n"] = spec.n;
  config["T"] = spec.T;
  config["params"] = to_json(spec.params);
  config["grid"] = o.grid;
  if (!fits.empty()) {
    Json fj = Json::array();
    for (const auto& [fam, J] : fits) fj.push_back(to_string(fam) + ":" + std::to_string(J));
    config["fit"] = fj;
    config["replicates"] = o.replicates;
    config["fit_options"] = fit_options_json(o.fit);
    config["fit_seed"] = o.fit.seed;
  }
  Json manifest = make_manifest("simulate", config, Json::object(), spec.seed);

  const ScenarioRun run = simulate_scenario(spec);
  ArtifactSet artifacts(dir);
  artifacts.add("locations.csv", to_csv(run.locations));
  artifacts.add("true_deformed.csv", to_csv(run.true_deformed));
  artifacts.add("observations.csv", to_csv(run.observations));
  artifacts.add("empirical_corr.csv", to_csv(run.empirical_corr));
  if (o.grid > 0) {
    const Eigen::MatrixX2d g = regular_grid(o.grid);
    artifacts.add("grid.csv", to_csv(g));
    artifacts.add("true_deformed_grid.csv", to_csv(true_deformation(spec.kind, g)));
  }

  if (!fits.empty()) {
    std::vector<FitConfig> configs;
    for (const auto& [fam, J] : fits)
      configs.push_back(make_fit_config(o.fit, fam, J, common.threads));
    std::string table = "scenario,family,J,replicate,nu,theta,nugget,mse,converged,seconds\n";
    std::vector<std::vector<double>> mse(configs.size());
    for (int r = 0; r < o.replicates; ++r) {
      ScenarioSpec rs = spec;
      rs.seed = spec.seed + static_cast<std::uint64_t>(r);
      const std::vector<ScenarioRow> rows =
          r == 0 ? run_scenario(rs, run, configs) : run_scenario(rs, configs);
      for (std::size_t c = 0; c < rows.size(); ++c) {
        const ScenarioRow& row = rows[c];
        mse[c].push_back(row.mse);
        table += row.scenario + "," + to_string(row.family) + "," + std::to_string(row.J) + "," +
                 std::to_string(r) + "," + round5(row.params.nu) + "," +
                 round5(row.params.theta) + "," + round5(row.params.nugget) + "," +
                 round5(row.mse) + "," + (row.converged ? "true" : "false") + "," +
                 (common.timing ? round5(row.seconds) : std::string()) + "\n";
        out << row.scenario << " " << to_string(row.family) << " J=" << row.J
            << " replicate=" << r << " mse=" << round5(row.mse) << "\n";
      }
    }
    artifacts.add("fit_table.csv", table);
    std::string summary = "scenario,family,J,replicates,mse_mean,mse_sd\n";
    for (std::size_t c = 0; c < configs.size(); ++c) {
      const std::vector<double>& m = mse[c];
      double mean = 0.0;
      for (double v : m) mean += v;
      mean /= static_cast<double>(m.size());
      double var = 0.0;
      for (double v : m) var += (v - mean) * (v - mean);
      const double sd = m.size() > 1 ? std::sqrt(var / static_cast<double>(m.size() - 1)) : 0.0;
      summary += to_string(spec.kind) + "," + to_string(configs[c].family) + "," +
                 std::to_string(configs[c].J) + "," + std::to_string(m.size()) + "," +
                 round5(mean) + "," + round5(sd) + "\n";
    }
    artifacts.add("fit_table_summary.csv", summary);
  }

  finish_manifest(manifest, artifacts, common.timing, start);
  artifacts.add("manifest.json", dump_json(manifest));
  artifacts.commit();
  out << "simulated " << to_string(spec.kind) << " n=" << spec.n << " T=" << spec.T
      << " -> " << dir.string() << "\n";
  return kOk;
}

// --- fit ------------------------------------------------------------------------

struct FitCommandOptions {
  std::string data;
  std::string family = "mexican-hat";
  int J = 2;
  FitOptions fit;
};

int cmd_fit(const FitCommandOptions& o, const Common& common, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const FitConfig config = make_fit_config(o.fit, parse_family(o.family), o.J, common.threads);
  const fs::path data_dir(o.data);
  const fs::path dir = resolve_out(common, "fit");

  const SpatioTemporalDataSet data = load_dataset(data_dir);
  Json inputs;
  inputs["locations.csv"] = hex64(fnv1a64(read_file((data_dir / "locations.csv").string())));
  inputs["observations.csv"] = hex64(fnv1a64(read_file((data_dir / "observations.csv").string())));

  Json cfg;
  cfg["family"] = to_string(config.family);
  cfg["J"] = config.J;
  cfg["fit_options"] = fit_options_json(o.fit);
  Json manifest = make_manifest("fit", cfg, inputs, o.fit.seed);

  const FitResult result = fit_alternating(data, config);
  for (const std::string& w : result.warnings)
    if (w.rfind("fit aborted", 0) == 0) throw NotPositiveDefinite(w);

  Json fit_json = to_json(result);
  fit_json["run_id"] = manifest["run_id"];

  const Eigen::MatrixXd emp = empirical_correlation(data.observations);
  const Eigen::MatrixXd fitted = fitted_correlation(result.deformed_coords, result.params.theta);
  std::string scatter;
  for (Eigen::Index i = 0; i < emp.rows(); ++i)
    for (Eigen::Index j = i + 1; j < emp.cols(); ++j)
      scatter += std::to_string(i) + "," + std::to_string(j) + "," + format_double(emp(i, j)) +
                 "," + format_double(fitted(i, j)) + "\n";

  const std::string summary = to_string(result.family) + "," + std::to_string(result.J) + "," +
                              round5(result.params.nu) + "," + round5(result.params.theta) + "," +
                              round5(result.params.nugget) + "," + round5(result.mse) + "," +
                              (result.converged ? "true" : "false");

  ArtifactSet artifacts(dir);
  artifacts.add("fit_result.json", dump_json(fit_json));
  artifacts.add("deformed.csv", to_csv(result.deformed_coords));
  artifacts.add("deformed_aligned.csv", to_csv(result.aligned_coords));
  artifacts.add("correlation_scatter.csv", scatter);
  artifacts.add("summary.csv", "family,J,nu,theta,nugget,mse,converged\n" + summary + "\n");
  finish_manifest(manifest, artifacts, common.timing, start);
  artifacts.add("manifest.json", dump_json(manifest));
  artifacts.commit();
  out << summary << "\n";
  return kOk;
}

// --- ghcn-prepare ---------------------------------------------------------------

struct GhcnOptions {
  std::string dly_dir;
  std::string stations;
  std::string states;
  int from = 1980;
  int to = 1999;
  std::string element = "TMAX";
  bool flag_tolerant = false;
};

std::vector<std::string> split_states(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove(item.begin(), item.end(), ' '), item.end());
    std::transform(item.begin(), item.end(), item.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_ghcn_prepare(const GhcnOptions& o, const Common& common, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  IngestConfig config;
  config.element = o.element;
  config.start_year = o.from;
  config.end_year = o.to;
  config.state_filter = split_states(o.states);
  config.validate();
  const fs::path dir = resolve_out(common, "ghcn-prepare");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.dly_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".dly") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .dly files in " + o.dly_dir);

  ParseOptions parse;
  parse.element = o.element;
  parse.flag_tolerant = o.flag_tolerant;
  Json inputs = Json::object();
  std::vector<MonthBlock> records;
  for (const fs::path& f : files) {
    inputs[f.filename().string()] = hex64(fnv1a64(read_file(f.string())));
    auto blocks = parse_dly_file(f.string(), parse);
    records.insert(records.end(), std::make_move_iterator(blocks.begin()),
                   std::make_move_iterator(blocks.end()));
  }
  inputs["stations"] = hex64(fnv1a64(read_file(o.stations)));
  const std::vector<StationMeta> stations = parse_stations_file(o.stations);

  Json cfg;
  cfg["element"] = config.element;
  cfg["from"] = config.start_year;
  cfg["to"] = config.end_year;
  cfg["states"] = config.state_filter;
  cfg["flag_tolerant"] = o.flag_tolerant;
  Json manifest = make_manifest("ghcn-prepare", cfg, inputs, 0);

  const GhcnDataset ds = build_dataset(select_complete_stations(records, stations, config), config);

  Json norm;
  norm["lon_min"] = ds.normalization.lon_min;
  norm["lon_max"] = ds.normalization.lon_max;
  norm["lat_min"] = ds.normalization.lat_min;
  norm["lat_max"] = ds.normalization.lat_max;
  norm["x1"] = "longitude";
  norm["x2"] = "latitude";
  norm["units"] = "observations are tenths / 10";
  std::string ids;
  for (const std::string& id : ds.data.site_ids) ids += id + "\n";

  ArtifactSet artifacts(dir);
  artifacts.add("locations.csv", to_csv(ds.data.locations));
  artifacts.add("observations.csv", to_csv(ds.data.observations));
  artifacts.add("site_ids.txt", ids);
  artifacts.add("normalization.json", dump_json(norm));
  finish_manifest(manifest, artifacts, common.timing, start);
  artifacts.add("manifest.json", dump_json(manifest));
  artifacts.commit();
  out << "selected " << ds.data.sites() << " stations, " << config.start_year << "-01-01 to "
      << config.end_year << "-12-31 (" << ds.data.times() << " days) -> " << dir.string() << "\n";
  return kOk;
}

// --- table ----------------------------------------------------------------------

struct TableOptions {
  std::vector<std::string> inputs;
  std::string format = "csv";
  std::string out;
};

int cmd_table(const TableOptions& o, std::ostream& out) {
  if (o.format != "csv" && o.format != "markdown")
    throw CLI::ValidationError("--format", "expected csv or markdown");
  struct Row {
    std::string family;
    int J;
    CovarianceParams p;
    double mse;
  };
  std::vector<Row> rows;
  std::set<std::string> seen;
  for (const std::string& in : o.inputs) {
    fs::path path(in);
    if (fs::is_directory(path)) path /= "fit_result.json";
    const Json j = parse_json_file(path.string());
    const std::string key =
        j.contains("run_id") ? j["run_id"].get<std::string>() : hex64(fnv1a64(j.dump()));
    if (!seen.insert(key).second) continue;
    const FitResult r = fit_result_from_json(j);
    rows.push_back({to_string(r.family), r.J, r.params, r.mse});
  }

  const std::vector<std::string> header = {"family", "J", "nu", "theta", "nugget", "mse"};
  std::string text;
  auto emit = [&](const std::vector<std::string>& cells) {
    if (o.format == "csv") {
      for (std::size_t i = 0; i < cells.size(); ++i) text += (i ? "," : "") + cells[i];
    } else {
      text += "|";
      for (const std::string& c : cells) text += " " + c + " |";
    }
    text += "\n";
  };
  emit(header);
  if (o.format == "markdown") emit({"---", "---", "---", "---", "---", "---"});
  for (const Row& r : rows)
    emit({r.family, std::to_string(r.J), round5(r.p.nu), round5(r.p.theta), round5(r.p.nugget),
          round5(r.mse)});

  if (o.out.empty())
    out << text;
  else
    atomic_write(o.out, text);
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonstationary spatial covariance via wavelet-based monotone deformations",
               "wavedeform"};
  app.set_version_flag("--version", WAVEDEFORM_VERSION);
  app.set_config("--config", "", "Read options from a key = value file (flags take precedence)");
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_out) {
    if (with_out)
      sub->add_option("--out", common.out,
                      std::string("Output directory (default: $") + kOutEnv + "/<subcommand>)");
    sub->add_option("--threads", common.threads, "Maximum worker threads")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--timing", common.timing, "Record wall-clock times in the artifacts");
  };

  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate a deformation scenario");
  simulate->add_option("--kind", sim.kind, "linear | quadratic | non-linear | wavelet")->required();
  simulate->add_option("--n", sim.n, "Number of sites")->capture_default_str();
  simulate->add_option("--T", sim.T, "Number of time points")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Simulation seed")->capture_default_str();
  simulate->add_option("--nu", sim.nu, "Sill")->capture_default_str();
  simulate->add_option("--theta", sim.theta, "Range")->capture_default_str();
  simulate->add_option("--nugget", sim.nugget, "Nugget variance")->capture_default_str();
  simulate->add_option("--grid", sim.grid, "Also write a g x g grid and its true deformation")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--fit", sim.fits, "Fit family:J to each replicate (repeatable)");
  simulate->add_option("--replicates", sim.replicates, "Replicates for --fit (seeds seed+r)")
      ->capture_default_str();
  add_fit_options(simulate, sim.fit, "--fit-seed");
  add_common(simulate, true);

  FitCommandOptions fit;
  CLI::App* fitcmd = app.add_subcommand("fit", "Fit a deformation model to a dataset bundle");
  fitcmd->add_option("--data", fit.data, "Directory with locations.csv and observations.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  fitcmd->add_option("--family", fit.family, "mexican-hat | shannon")->capture_default_str();
  fitcmd->add_option("--J", fit.J, "Finest wavelet level")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  add_fit_options(fitcmd, fit.fit, "--seed");
  add_common(fitcmd, true);

  GhcnOptions ghcn;
  CLI::App* prepare = app.add_subcommand("ghcn-prepare", "Build a dataset bundle from GHCN-Daily");
  prepare->add_option("--dly-dir", ghcn.dly_dir, "Directory of .dly files")
      ->required()
      ->check(CLI::ExistingDirectory);
  prepare->add_option("--stations", ghcn.stations, "ghcnd-stations.txt")
      ->required()
      ->check(CLI::ExistingFile);
  prepare->add_option("--states", ghcn.states, "Comma-separated state codes");
  prepare->add_option("--from", ghcn.from, "First year")->capture_default_str();
  prepare->add_option("--to", ghcn.to, "Last year")->capture_default_str();
  prepare->add_option("--element", ghcn.element, "GHCN element")->capture_default_str();
  prepare->add_flag("--flag-tolerant", ghcn.flag_tolerant, "Keep values with a quality flag");
  add_common(prepare, true);

  TableOptions table;
  CLI::App* tablecmd = app.add_subcommand("table", "Tabulate fit results");
  tablecmd->add_option("inputs", table.inputs, "fit_result.json files or fit directories");
  tablecmd->add_option("--format", table.format, "csv | markdown")->capture_default_str();
  tablecmd->add_option("--out", table.out, "Write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, common, out);
    if (*fitcmd) return cmd_fit(fit, common, out);
    if (*prepare) return cmd_ghcn_prepare(ghcn, common, out);
    if (*tablecmd) return cmd_table(table, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const DomainError& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const IndexOutOfRange& e) {
    err << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace wavedeform::cli
