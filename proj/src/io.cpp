#include "milab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace milab {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string method_name(Method method) {
  return method == Method::Regression ? "regression" : "pmm";
}

std::string mechanism_name(MechanismKind kind) {
  return kind == MechanismKind::MarThreshold ? "mar" : "mcar";
}

std::string cell_id(const ExperimentCell& cell) {
  char rho_buf[24];
  std::snprintf(rho_buf, sizeof(rho_buf), "%g", cell.rho);
  return method_name(cell.method) + "_" + mechanism_name(cell.mechanism.kind) +
         "_rho" + rho_buf + "_n" + std::to_string(cell.n);
}

namespace {

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary); // binary: LF endings everywhere
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path.string());
  }
  return out;
}

std::string summary_row(const CellOutput& output) {
  const ExperimentCell& cell = output.cell;
  const CellResult& res = output.result;
  std::string row = method_name(cell.method);
  row += ',';
  row += mechanism_name(cell.mechanism.kind);
  row += ',';
  row += fmt_double(cell.rho);
  row += ',';
  row += std::to_string(cell.n);
  row += ',';
  row += fmt_double(res.avg_estimate);
  row += ',';
  if (res.relative_bias_pct) {
    row += fmt_double(*res.relative_bias_pct);
  }
  row += ',';
  row += fmt_double(res.coverage_pct);
  row += ',';
  row += fmt_double(res.avg_ci_width);
  row += ',';
  row += fmt_double(res.avg_y_mean);
  row += ',';
  row += fmt_double(res.avg_y_sd);
  row += ',';
  row += std::to_string(res.reps_completed);
  return row;
}

ordered_json summary_object(const CellOutput& output) {
  const ExperimentCell& cell = output.cell;
  const CellResult& res = output.result;
  ordered_json obj;
  obj["method"] = method_name(cell.method);
  obj["mechanism"] = mechanism_name(cell.mechanism.kind);
  obj["rho"] = cell.rho;
  obj["n"] = cell.n;
  obj["avg_estimate"] = res.avg_estimate;
  if (res.relative_bias_pct) {
    obj["relative_bias_pct"] = *res.relative_bias_pct;
  } else {
    obj["relative_bias_pct"] = nullptr;
  }
  obj["coverage_pct"] = res.coverage_pct;
  obj["avg_ci_width"] = res.avg_ci_width;
  obj["avg_y_mean"] = res.avg_y_mean;
  obj["avg_y_sd"] = res.avg_y_sd;
  obj["reps"] = res.reps_completed;
  return obj;
}

} // namespace

void write_summary_csv(const fs::path& path,
                       std::span<const CellOutput> outputs) {
  std::ofstream out = open_for_write(path);
  out << kSummaryHeader << '\n';
  for (const CellOutput& output : outputs) {
    out << summary_row(output) << '\n';
  }
}

void write_summary_json(const fs::path& path,
                        std::span<const CellOutput> outputs) {
  ordered_json arr = ordered_json::array();
  for (const CellOutput& output : outputs) {
    arr.push_back(summary_object(output));
  }
  std::ofstream out = open_for_write(path);
  out << arr.dump(2) << '\n';
}

void write_replicates_csv(const fs::path& path, const CellOutput& output) {
  std::ofstream out = open_for_write(path);
  out << kReplicateHeader << '\n';
  for (std::size_t rep = 0; rep < output.records.size(); ++rep) {
    const ReplicateRecord& r = output.records[rep];
    out << rep << ',' << fmt_double(r.slope) << ',' << fmt_double(r.se) << ','
        << fmt_double(r.ci_low) << ',' << fmt_double(r.ci_high) << ','
        << fmt_double(r.y_mean) << ',' << fmt_double(r.y_sd) << ','
        << r.redraws << '\n';
  }
}

void write_replicates_json(const fs::path& path, const CellOutput& output) {
  ordered_json arr = ordered_json::array();
  for (std::size_t rep = 0; rep < output.records.size(); ++rep) {
    const ReplicateRecord& r = output.records[rep];
    ordered_json obj;
    obj["rep"] = rep;
    obj["slope"] = r.slope;
    obj["se"] = r.se;
    obj["ci_low"] = r.ci_low;
    obj["ci_high"] = r.ci_high;
    obj["y_mean"] = r.y_mean;
    obj["y_sd"] = r.y_sd;
    obj["redraws"] = r.redraws;
    arr.push_back(obj);
  }
  std::ofstream out = open_for_write(path);
  out << arr.dump(2) << '\n';
}

ScatterData make_scatter(std::uint64_t seed, double rho, int n,
                         const Mechanism& mech, int donor_k,
                         MatchType match_type) {
  ExperimentCell cell;
  cell.rho = rho;
  cell.mechanism = mech;
  cell.n = n;
  cell.donor_k = donor_k;
  cell.match_type = match_type;
  cell.master_seed = seed;

  ScatterData scatter;
  scatter.complete = generate_complete(cell, 0, 0);
  scatter.incomplete = generate_incomplete(cell, 0, 0);

  const OlsFit fit = ols_observed(scatter.incomplete);
  const std::uint64_t cseed = condition_seed(cell);

  RngStream reg_stream(cseed, stream_id_for(StreamPurpose::Impute, 0,
                                            method_tag(Method::Regression), 0,
                                            0));
  scatter.regression =
      impute_once(scatter.incomplete, fit,
                  ImputerConfig{Method::Regression, donor_k, match_type},
                  reg_stream);

  RngStream pmm_stream(
      cseed,
      stream_id_for(StreamPurpose::Impute, 0, method_tag(Method::Pmm), 0, 0));
  scatter.pmm = impute_once(scatter.incomplete, fit,
                            ImputerConfig{Method::Pmm, donor_k, match_type},
                            pmm_stream);
  return scatter;
}

namespace {

template <typename Emit>
void scatter_rows(const ScatterData& scatter, Emit&& emit) {
  const int n = scatter.complete.n();
  for (int i = 0; i < n; ++i) {
    if (!scatter.incomplete.is_missing(i)) {
      emit(scatter.complete.x[i], scatter.complete.y[i], "observed");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (scatter.incomplete.is_missing(i)) {
      emit(scatter.complete.x[i], scatter.complete.y[i], "deleted_truth");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (scatter.incomplete.is_missing(i)) {
      emit(scatter.regression.x[i], scatter.regression.y[i],
           "imputed_regression");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (scatter.incomplete.is_missing(i)) {
      emit(scatter.pmm.x[i], scatter.pmm.y[i], "imputed_pmm");
    }
  }
}

} // namespace

void write_scatter_csv(const fs::path& path, const ScatterData& scatter) {
  std::ofstream out = open_for_write(path);
  out << kScatterHeader << '\n';
  scatter_rows(scatter, [&](double x, double y, const char* status) {
    out << fmt_double(x) << ',' << fmt_double(y) << ',' << status << '\n';
  });
}

void write_scatter_json(const fs::path& path, const ScatterData& scatter) {
  ordered_json arr = ordered_json::array();
  scatter_rows(scatter, [&](double x, double y, const char* status) {
    ordered_json obj;
    obj["x"] = x;
    obj["y"] = y;
    obj["status"] = status;
    arr.push_back(obj);
  });
  std::ofstream out = open_for_write(path);
  out << arr.dump(2) << '\n';
}

void validate(const RunConfig& config) {
  if (config.reps < 1) {
    throw ConfigError("reps must be >= 1");
  }
  if (config.m_imputations < 2) {
    throw ConfigError("m must be >= 2 (pooling needs a between-imputation "
                      "variance)");
  }
  if (config.donor_k < 1) {
    throw ConfigError("k must be >= 1");
  }
  if (config.n < 1) {
    throw ConfigError("n must be >= 1");
  }
  if (config.donor_k > config.n) {
    throw ConfigError("k cannot exceed n");
  }
  if (!(std::abs(config.rho) <= 1.0)) {
    throw ConfigError("rho must lie in [-1, 1]");
  }
  if (config.mechanism != "mar" && config.mechanism != "mcar") {
    throw ConfigError("mechanism must be 'mar' or 'mcar'");
  }
  if (config.method != "regression" && config.method != "pmm") {
    throw ConfigError("method must be 'regression' or 'pmm'");
  }
  if (config.match_type < 0 || config.match_type > 2) {
    throw ConfigError("match-type must be 0, 1 or 2");
  }
  if (!std::isfinite(config.mar_threshold)) {
    throw ConfigError("threshold must be finite");
  }
  if (!(config.mcar_miss_prob >= 0.0 && config.mcar_miss_prob <= 1.0)) {
    throw ConfigError("miss-prob must lie in [0, 1]");
  }
  if (config.threads < 0) {
    throw ConfigError("threads must be >= 0");
  }
  if (config.format != "csv" && config.format != "json") {
    throw ConfigError("format must be 'csv' or 'json'");
  }
  if (config.out_dir.empty()) {
    throw ConfigError("output directory must not be empty");
  }
}

Method parse_method(const std::string& name) {
  if (name == "regression") {
    return Method::Regression;
  }
  if (name == "pmm") {
    return Method::Pmm;
  }
  throw ConfigError("unknown method: " + name);
}

Mechanism parse_mechanism(const RunConfig& config) {
  if (config.mechanism == "mar") {
    return Mechanism::mar(config.mar_threshold);
  }
  if (config.mechanism == "mcar") {
    return Mechanism::mcar(config.mcar_miss_prob);
  }
  throw ConfigError("unknown mechanism: " + config.mechanism);
}

namespace {

MatchType to_match_type(int value) {
  switch (value) {
  case 0:
    return MatchType::Type0;
  case 1:
    return MatchType::Type1;
  case 2:
    return MatchType::Type2;
  default:
    throw ConfigError("match-type must be 0, 1 or 2");
  }
}

// Creating the directories up front makes an unwritable destination fail
// before any simulation work runs.
fs::path prepare_output_dir(const RunConfig& config, bool with_replicates) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory " + dir.string() +
                             ": " + ec.message());
  }
  if (with_replicates) {
    fs::create_directories(dir / "replicates", ec);
    if (ec) {
      throw std::runtime_error("cannot create " + (dir / "replicates").string() +
                               ": " + ec.message());
    }
  }
  return dir;
}

void write_outputs(const RunConfig& config, const fs::path& dir,
                   std::span<const CellOutput> outputs) {
  const bool json = config.format == "json";
  const char* ext = json ? ".json" : ".csv";
  if (json) {
    write_summary_json(dir / "summary.json", outputs);
  } else {
    write_summary_csv(dir / "summary.csv", outputs);
  }
  for (const CellOutput& output : outputs) {
    const fs::path rep_path = dir / "replicates" / (cell_id(output.cell) + ext);
    if (json) {
      write_replicates_json(rep_path, output);
    } else {
      write_replicates_csv(rep_path, output);
    }
  }
}

} // namespace

void cmd_grid(const RunConfig& config) {
  validate(config);
  const fs::path dir = prepare_output_dir(config, true);

  GridConfig grid;
  grid.master_seed = config.seed;
  grid.reps = config.reps;
  grid.m_imputations = config.m_imputations;
  grid.donor_k = config.donor_k;
  grid.match_type = to_match_type(config.match_type);
  grid.mar_threshold = config.mar_threshold;
  grid.mcar_miss_prob = config.mcar_miss_prob;
  grid.threads = config.threads;

  const std::vector<CellOutput> outputs = run_grid(grid);
  write_outputs(config, dir, outputs);
}

void cmd_cell(const RunConfig& config) {
  validate(config);
  const fs::path dir = prepare_output_dir(config, true);

  ExperimentCell cell;
  cell.rho = config.rho;
  cell.mechanism = parse_mechanism(config);
  cell.n = config.n;
  cell.method = parse_method(config.method);
  cell.match_type = to_match_type(config.match_type);
  cell.reps = config.reps;
  cell.m_imputations = config.m_imputations;
  cell.donor_k = config.donor_k;
  cell.master_seed = config.seed;

  const CellOutput output = run_cell(cell, config.threads);
  const std::vector<CellOutput> outputs{output};
  write_outputs(config, dir, outputs);
}

void cmd_scatter(const RunConfig& config) {
  validate(config);
  const fs::path dir = prepare_output_dir(config, false);

  const ScatterData scatter =
      make_scatter(config.seed, config.rho, config.n, parse_mechanism(config),
                   config.donor_k, to_match_type(config.match_type));
  if (config.format == "json") {
    write_scatter_json(dir / "scatter.json", scatter);
  } else {
    write_scatter_csv(dir / "scatter.csv", scatter);
  }
}

} // namespace milab
