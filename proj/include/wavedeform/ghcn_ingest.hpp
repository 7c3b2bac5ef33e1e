#ifndef WAVEDEFORM_GHCN_INGEST_HPP
#define WAVEDEFORM_GHCN_INGEST_HPP

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wavedeform/likelihood_fit.hpp"

namespace wavedeform {

// One ELEMENT row of a .dly file: a station-month. values[d] is day d+1;
// days that do not exist in the month are absent (values.size() is the month
// length).
struct MonthBlock {
  std::string station_id;
  int year = 0;
  int month = 0;
  std::string element;
  std::vector<std::optional<int>> values;  // tenths of a unit
};

struct ParseOptions {
  std::string element = "TMAX";
  // Keep values whose quality flag is set.
  bool flag_tolerant = false;
  int min_value = -800;
  int max_value = 800;
};

// Rows with a different ELEMENT are consumed and skipped. Blank lines are
// ignored. Throws MalformedLine / TruncatedRecord carrying the 1-based line.
std::vector<MonthBlock> parse_dly(std::istream& in, const ParseOptions& options = {});
std::vector<MonthBlock> parse_dly_file(const std::string& path, const ParseOptions& options = {});

struct StationMeta {
  std::string id;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string state;
};

// ghcnd-stations.txt layout. Lines shorter than the STATE column get an empty
// state.
std::vector<StationMeta> parse_stations(std::istream& in);
std::vector<StationMeta> parse_stations_file(const std::string& path);

// Two-letter codes accepted by the state filter.
bool is_known_state_code(std::string_view code);

struct IngestConfig {
  std::string element = "TMAX";
  int start_year = 1980;
  int end_year = 1999;
  std::vector<std::string> state_filter;  // empty: no filter
  void validate() const;
};

// Daily series over [start_year-01-01, end_year-12-31] for one station.
struct StationSeries {
  StationMeta meta;
  std::vector<int> values;  // tenths
};

int days_in_month(int year, int month);
long days_in_range(int start_year, int end_year);

// Stations (sorted by id) with a value on every day of the range. Throws
// EmptySelection listing the filter in force.
std::vector<StationSeries> select_complete_stations(const std::vector<MonthBlock>& records,
                                                    const std::vector<StationMeta>& stations,
                                                    const IngestConfig& config);

struct CoordinateNormalization {
  double lon_min = 0.0, lon_max = 1.0;
  double lat_min = 0.0, lat_max = 1.0;

  Eigen::RowVector2d normalize(double lon, double lat) const;
  // Returns (lon, lat).
  Eigen::RowVector2d denormalize(const Eigen::RowVector2d& x) const;
};

struct GhcnDataset {
  SpatioTemporalDataSet data;  // observations in whole units (tenths / 10)
  CoordinateNormalization normalization;
  int start_year = 0;
  int end_year = 0;
};

// Throws EmptySelection for no stations, InconsistentLength for ragged series.
GhcnDataset build_dataset(const std::vector<StationSeries>& selected, const IngestConfig& config);

}  // namespace wavedeform

#endif  // WAVEDEFORM_GHCN_INGEST_HPP
