#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "matnet/clustering/features.hpp"
#include "matnet/clustering/temporal.hpp"
#include "matnet/history_match.hpp"
#include "matnet/matbal_forecast.hpp"
#include "matnet/matbal_history.hpp"

namespace matnet::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Parses a JSON or TOML configuration file into a JSON object. The format
/// follows the extension (.json, .toml); any other extension is sniffed, with
/// a leading '{' meaning JSON. TOML integers >= 0 become unsigned JSON numbers
/// and date/time values become strings.
json load_config(const fs::path& path);

/// Same conversion for TOML text held in memory; `source` names it in errors.
json parse_toml(std::string_view text, const std::string& source);

/// Throws ConfigError naming the first key of `obj` not in `allowed`.
void check_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& context);

/// Rounds to 12 significant digits, the precision of every written file.
double round12(double v);

/// Network JSON: blocks reference PVT and rel-perm CSVs by path relative to
/// the JSON file. Tables shared by several blocks are loaded once.
ReservoirNetwork load_network(const fs::path& path);
/// Writes the network JSON plus one CSV per distinct PVT / rel-perm table
/// into the same directory.
void save_network(const fs::path& path, const ReservoirNetwork& net);

/// `time,block,np,gp,wp,ginj,winj[,pobs]`
HistorySchedule load_history(const fs::path& path, std::size_t n_blocks);
void save_history(const fs::path& path, const HistorySchedule& s);

/// `time,block,pwf,qlmax,nproducers,ginj,winj`
ForecastSchedule load_forecast_schedule(const fs::path& path, std::size_t n_blocks);
void save_forecast_schedule(const fs::path& path, const ForecastSchedule& s);

/// `time,block,pobs,std`; non-positive std falls back to the base-std rule.
ObservationSet load_observations(const fs::path& path, double std_floor);
void save_observations(const fs::path& path, const ObservationSet& obs);

SolverConfig parse_solver(const json& j);
ForecastConfig parse_forecast_config(const json& j);
EsConfig parse_es(const json& j);
ParameterSpace parse_parameters(const json& j);
json parameters_to_json(const ParameterSpace& space);

/// `time,block,p,so,sg,sw,we`
void write_history_pressures(const fs::path& path, const HistoryResult& r);
/// `time,i,j,phase,flux_rb`, flux into i from j per step
void write_fluxes(const fs::path& path, const HistoryResult& r, const ReservoirNetwork& net);
/// `time,block,p,np,gp,wp`
void write_forecast(const fs::path& path, const ForecastResult& r);
/// `i,j`
void write_pattern(const fs::path& path, const std::vector<std::pair<int, int>>& pattern);

struct WellTable {
  clustering::WellFeatureMatrix features;
  Eigen::MatrixXd coords;  ///< n x 2
};

/// Wells CSV with a `well` column and `x`,`y` coordinates. Columns named in
/// `categorical` are categorical; `numeric` lists numeric columns (empty
/// selects every remaining column). Empty numeric cells are missing values.
WellTable load_wells(const fs::path& path, const std::vector<std::string>& numeric,
                     const std::vector<std::string>& categorical);

/// Channel CSV `well,time,value`, one series per well with increasing time.
std::map<std::string, clustering::TimeSeries> load_channel(const fs::path& path);

}  // namespace matnet::io
