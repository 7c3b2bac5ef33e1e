#include "wavedeform/ghcn_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <set>

#include "wavedeform/error.hpp"

namespace wavedeform {

namespace {

constexpr std::size_t kDlyLineLength = 269;
constexpr int kMissing = -9999;

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Field at 1-based columns [first, last].
std::string_view field(std::string_view line, std::size_t first, std::size_t last) {
  return line.substr(first - 1, last - first + 1);
}

int parse_int(std::string_view text, std::size_t line_no, std::size_t column, const char* what) {
  const std::string_view t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw MalformedLine(std::string("bad ") + what + " '" + std::string(text) + "' at column " +
                            std::to_string(column),
                        line_no);
  return v;
}

double parse_double(std::string_view text, std::size_t line_no, std::size_t column,
                    const char* what) {
  const std::string t(trim(text));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size())
    throw MalformedLine(std::string("bad ") + what + " '" + std::string(text) + "' at column " +
                            std::to_string(column),
                        line_no);
  return v;
}

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

}  // namespace

int days_in_month(int year, int month) {
  static constexpr int kDays[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) throw DomainError("month out of range");
  return month == 2 && is_leap(year) ? 29 : kDays[month - 1];
}

long days_in_range(int start_year, int end_year) {
  long days = 0;
  for (int y = start_year; y <= end_year; ++y) days += is_leap(y) ? 366 : 365;
  return days;
}

std::vector<MonthBlock> parse_dly(std::istream& in, const ParseOptions& options) {
  std::vector<MonthBlock> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const bool last_without_newline = in.eof();
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line.size() != kDlyLineLength) {
      const std::string msg = "expected " + std::to_string(kDlyLineLength) + " characters, got " +
                              std::to_string(line.size());
      if (last_without_newline && line.size() < kDlyLineLength) throw TruncatedRecord(msg, line_no);
      throw MalformedLine(msg, line_no);
    }
    const std::string_view element = field(line, 18, 21);
    const int year = parse_int(field(line, 12, 15), line_no, 12, "YEAR");
    const int month = parse_int(field(line, 16, 17), line_no, 16, "MONTH");
    if (month < 1 || month > 12)
      throw MalformedLine("MONTH " + std::to_string(month) + " at column 16", line_no);
    if (element != options.element) continue;

    MonthBlock block;
    block.station_id = std::string(field(line, 1, 11));
    block.year = year;
    block.month = month;
    block.element = std::string(element);
    const int ndays = days_in_month(year, month);
    block.values.resize(static_cast<std::size_t>(ndays));
    for (int d = 0; d < 31; ++d) {
      const std::size_t col = 22 + 8 * static_cast<std::size_t>(d);
      const int v = parse_int(field(line, col, col + 4), line_no, col, "VALUE");
      if (d >= ndays) continue;
      const char qflag = line[col + 5];
      const bool flagged = qflag != ' ' && !options.flag_tolerant;
      if (v == kMissing || flagged || v < options.min_value || v > options.max_value) continue;
      block.values[static_cast<std::size_t>(d)] = v;
    }
    out.push_back(std::move(block));
  }
  return out;
}

std::vector<MonthBlock> parse_dly_file(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  try {
    return parse_dly(in, options);
  } catch (const MalformedLine& e) {
    throw MalformedLine(path + ": " + e.what());
  } catch (const TruncatedRecord& e) {
    throw TruncatedRecord(path + ": " + e.what());
  }
}

std::vector<StationMeta> parse_stations(std::istream& in) {
  std::vector<StationMeta> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    if (line.size() < 30) throw MalformedLine("station line shorter than 30 characters", line_no);
    StationMeta s;
    s.id = std::string(field(line, 1, 11));
    s.latitude = parse_double(field(line, 13, 20), line_no, 13, "LATITUDE");
    s.longitude = parse_double(field(line, 22, 30), line_no, 22, "LONGITUDE");
    if (line.size() >= 40) s.state = std::string(trim(field(line, 39, 40)));
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<StationMeta> parse_stations_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return parse_stations(in);
}

bool is_known_state_code(std::string_view code) {
  static const std::set<std::string_view> kCodes = {
      "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DC", "DE", "FL", "GA", "HI", "IA", "ID", "IL",
      "IN", "KS", "KY", "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE",
      "NH", "NJ", "NM", "NV", "NY", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT",
      "VA", "VT", "WA", "WI", "WV", "WY",
      // territories
      "AS", "FM", "GU", "MH", "MP", "PR", "PW", "UM", "VI",
      // Canadian provinces and territories
      "AB", "BC", "MB", "NB", "NL", "NS", "NT", "NU", "ON", "PE", "QC", "SK", "YT"};
  return kCodes.contains(code);
}

void IngestConfig::validate() const {
  if (element.size() != 4) throw DomainError("element must be a 4-character code");
  if (start_year > end_year) throw DomainError("start_year must not exceed end_year");
  for (const std::string& s : state_filter)
    if (!is_known_state_code(s)) throw DomainError("unknown state code '" + s + "'");
}

std::vector<StationSeries> select_complete_stations(const std::vector<MonthBlock>& records,
                                                    const std::vector<StationMeta>& stations,
                                                    const IngestConfig& config) {
  config.validate();
  const std::set<std::string> states(config.state_filter.begin(), config.state_filter.end());
  const long T = days_in_range(config.start_year, config.end_year);

  // Day offset of the first day of each (year, month) in range.
  auto month_offset = [&](int year, int month) {
    long off = days_in_range(config.start_year, year - 1);
    for (int m = 1; m < month; ++m) off += days_in_month(year, m);
    return off;
  };

  std::map<std::string, std::vector<const MonthBlock*>> by_station;
  for (const MonthBlock& b : records) {
    if (b.element != config.element) continue;
    if (b.year < config.start_year || b.year > config.end_year) continue;
    by_station[b.station_id].push_back(&b);
  }

  std::map<std::string, const StationMeta*> meta;
  for (const StationMeta& s : stations) meta.emplace(s.id, &s);

  std::vector<StationSeries> out;
  for (const auto& [id, blocks] : by_station) {
    const auto m = meta.find(id);
    if (m == meta.end()) continue;
    if (!states.empty() && !states.contains(m->second->state)) continue;
    std::vector<std::optional<int>> days(static_cast<std::size_t>(T));
    for (const MonthBlock* b : blocks) {
      const long off = month_offset(b->year, b->month);
      for (std::size_t d = 0; d < b->values.size(); ++d) {
        auto& slot = days[static_cast<std::size_t>(off) + d];
        if (slot && b->values[d])
          throw DataError("duplicate " + config.element + " block for " + id + " " +
                          std::to_string(b->year) + "-" + std::to_string(b->month));
        if (b->values[d]) slot = b->values[d];
      }
    }
    if (!std::all_of(days.begin(), days.end(), [](const auto& v) { return v.has_value(); }))
      continue;
    StationSeries s;
    s.meta = *m->second;
    s.values.reserve(days.size());
    for (const auto& v : days) s.values.push_back(*v);
    out.push_back(std::move(s));
  }

  if (out.empty()) {
    std::string filter = config.state_filter.empty() ? "all states" : "states ";
    for (std::size_t i = 0; i < config.state_filter.size(); ++i)
      filter += (i ? "," : "") + config.state_filter[i];
    throw EmptySelection("no station has complete " + config.element + " records for " +
                         std::to_string(config.start_year) + "-" +
                         std::to_string(config.end_year) + " (" + filter + ", " +
                         std::to_string(by_station.size()) + " stations with records in range)");
  }
  return out;
}

Eigen::RowVector2d CoordinateNormalization::normalize(double lon, double lat) const {
  const double dlon = lon_max - lon_min;
  const double dlat = lat_max - lat_min;
  return {dlon > 0 ? (lon - lon_min) / dlon : 0.5, dlat > 0 ? (lat - lat_min) / dlat : 0.5};
}

Eigen::RowVector2d CoordinateNormalization::denormalize(const Eigen::RowVector2d& x) const {
  const double dlon = lon_max - lon_min;
  const double dlat = lat_max - lat_min;
  return {dlon > 0 ? lon_min + x(0) * dlon : lon_min, dlat > 0 ? lat_min + x(1) * dlat : lat_min};
}

GhcnDataset build_dataset(const std::vector<StationSeries>& selected, const IngestConfig& config) {
  if (selected.empty()) throw EmptySelection("build_dataset: no stations");
  const std::size_t T = selected.front().values.size();
  for (const StationSeries& s : selected)
    if (s.values.size() != T)
      throw InconsistentLength("station " + s.meta.id + " has " + std::to_string(s.values.size()) +
                               " days, expected " + std::to_string(T));

  GhcnDataset out;
  out.start_year = config.start_year;
  out.end_year = config.end_year;
  auto& nz = out.normalization;
  nz.lon_min = nz.lat_min = std::numeric_limits<double>::infinity();
  nz.lon_max = nz.lat_max = -std::numeric_limits<double>::infinity();
  for (const StationSeries& s : selected) {
    nz.lon_min = std::min(nz.lon_min, s.meta.longitude);
    nz.lon_max = std::max(nz.lon_max, s.meta.longitude);
    nz.lat_min = std::min(nz.lat_min, s.meta.latitude);
    nz.lat_max = std::max(nz.lat_max, s.meta.latitude);
  }

  const auto n = static_cast<Eigen::Index>(selected.size());
  out.data.locations.resize(n, 2);
  out.data.observations.resize(n, static_cast<Eigen::Index>(T));
  for (Eigen::Index i = 0; i < n; ++i) {
    const StationSeries& s = selected[static_cast<std::size_t>(i)];
    out.data.locations.row(i) = nz.normalize(s.meta.longitude, s.meta.latitude);
    for (std::size_t t = 0; t < T; ++t)
      out.data.observations(i, static_cast<Eigen::Index>(t)) = s.values[t] / 10.0;
    out.data.site_ids.push_back(s.meta.id);
  }
  return out;
}

}  // namespace wavedeform
