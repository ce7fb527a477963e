#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "milab/simulator.hpp"

namespace milab {

// Configuration problem detected before any work starts; the CLI maps this
// to its own exit code.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One double, 17 significant digits: parses back to the identical bits.
std::string fmt_double(double v);

std::string method_name(Method method);
std::string mechanism_name(MechanismKind kind);

// e.g. "pmm_mar_rho0.8_n200"
std::string cell_id(const ExperimentCell& cell);

inline constexpr const char* kSummaryHeader =
    "method,mechanism,rho,n,avg_estimate,relative_bias_pct,coverage_pct,"
    "avg_ci_width,avg_y_mean,avg_y_sd,reps";

inline constexpr const char* kReplicateHeader =
    "rep,slope,se,ci_low,ci_high,y_mean,y_sd,redraws";

inline constexpr const char* kScatterHeader = "x,y,status";

void write_summary_csv(const std::filesystem::path& path,
                       std::span<const CellOutput> outputs);
void write_summary_json(const std::filesystem::path& path,
                        std::span<const CellOutput> outputs);
void write_replicates_csv(const std::filesystem::path& path,
                          const CellOutput& output);
void write_replicates_json(const std::filesystem::path& path,
                           const CellOutput& output);

// The four panels of the single-shot comparison: the complete draw, the
// incomplete copy, and one completed copy per method from the same mask.
struct ScatterData {
  Dataset complete;
  Dataset incomplete;
  ImputedDataset regression;
  ImputedDataset pmm;
};

ScatterData make_scatter(std::uint64_t seed, double rho, int n,
                         const Mechanism& mech, int donor_k,
                         MatchType match_type);

// Rows: observed cases, then the deleted truth, then each method's imputed
// values for the deleted cells. status is one of observed, deleted_truth,
// imputed_regression, imputed_pmm.
void write_scatter_csv(const std::filesystem::path& path,
                       const ScatterData& scatter);
void write_scatter_json(const std::filesystem::path& path,
                        const ScatterData& scatter);

// Parsed command line for the milab tool.
struct RunConfig {
  enum class Command { Grid, Cell, Scatter };

  Command command = Command::Grid;
  std::uint64_t seed = 44;
  int reps = 500;
  int m_imputations = 10;
  int donor_k = 5;
  int n = 200;
  double rho = 0.8;
  std::string mechanism = "mar";
  std::string method = "regression";
  int match_type = 2;
  double mar_threshold = -1.0;
  double mcar_miss_prob = 0.84;
  int threads = 0;
  std::string out_dir = "out";
  std::string format = "csv";
};

// Throws ConfigError when any field violates a module precondition.
void validate(const RunConfig& config);

Method parse_method(const std::string& name);
Mechanism parse_mechanism(const RunConfig& config);

// Full grid: summary.{csv,json} plus replicates/<cell-id>.<ext> per cell.
void cmd_grid(const RunConfig& config);

// One cell: a one-row summary file plus its replicate file.
void cmd_cell(const RunConfig& config);

// scatter.{csv,json} for the configured condition.
void cmd_scatter(const RunConfig& config);

} // namespace milab
