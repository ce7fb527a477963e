#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "milab/impute.hpp"
#include "milab/missingness.hpp"
#include "milab/pooling.hpp"

namespace milab {

// One experimental condition crossed with one imputation method.
struct ExperimentCell {
  double rho = 0.8;
  Mechanism mechanism = Mechanism::mar();
  int n = 200;
  Method method = Method::Regression;
  MatchType match_type = MatchType::Type2;
  int reps = 500;
  int m_imputations = 10;
  int donor_k = 5;
  std::uint64_t master_seed = 44;
};

// Aggregated performance of one cell over its replicates.
struct CellResult {
  double avg_estimate = 0.0;
  double true_slope = 0.0;
  std::optional<double> relative_bias_pct; // absent when true_slope == 0
  double coverage_pct = 0.0;
  double avg_ci_width = 0.0;
  double avg_y_mean = 0.0;
  double avg_y_sd = 0.0;
  long redraw_count = 0;
  int reps_completed = 0;
};

// One generate -> ampute -> impute -> analyze -> pool pass.
struct ReplicateRecord {
  double slope = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double y_mean = 0.0;
  double y_sd = 0.0;
  int redraws = 0;
};

struct CellOutput {
  ExperimentCell cell;
  CellResult result;
  std::vector<ReplicateRecord> records;
};

// --- substream plumbing -----------------------------------------------
//
// Every random decision in a replicate draws from a stream keyed by
// (condition, purpose, attempt, method, rep, m). Data generation and
// amputation carry no method tag, so the regression and PMM cells of the
// same condition consume identical datasets and masks and differ only
// downstream.

enum class StreamPurpose : int { DataGen = 1, Ampute = 2, Impute = 3 };

// Seed shared by every stream of one condition; folds the master seed with
// rho, the mechanism and n (not the method).
std::uint64_t condition_seed(const ExperimentCell& cell);

// Packed stream id: purpose | attempt | method tag | rep | m, with m in the
// low bits so consecutive imputations are consecutive ids.
std::uint64_t stream_id_for(StreamPurpose purpose, int attempt, int method_tag,
                            std::uint64_t rep, int m);

int method_tag(Method method);

// The complete bivariate draw for one replicate attempt.
Dataset generate_complete(const ExperimentCell& cell, std::uint64_t rep,
                          int attempt);

// The same draw after amputation.
Dataset generate_incomplete(const ExperimentCell& cell, std::uint64_t rep,
                            int attempt);

// --- execution ----------------------------------------------------------

ReplicateRecord run_replicate(const ExperimentCell& cell, std::uint64_t rep);

// Serial reference: replicates in a plain loop. Kept as the comparison
// baseline for the OpenMP kernel.
CellOutput run_cell_serial(const ExperimentCell& cell);

// OpenMP kernel: replicates across threads, aggregation in replicate order.
// threads <= 0 means the OpenMP default. Output is identical to
// run_cell_serial for every thread count.
CellOutput run_cell(const ExperimentCell& cell, int threads = 0);

std::optional<double> relative_bias(double avg, double truth);

// Percentage of [low, high] intervals containing truth; empty input is
// std::invalid_argument.
double coverage(std::span<const std::pair<double, double>> intervals,
                double truth);

struct GridConfig {
  std::uint64_t master_seed = 44;
  int reps = 500;
  int m_imputations = 10;
  int donor_k = 5;
  MatchType match_type = MatchType::Type2;
  double mar_threshold = -1.0;
  double mcar_miss_prob = 0.84;
  int threads = 0;
};

// The default factorial design: mechanism {mar, mcar} x rho {0, 0.4, 0.8}
// x n {200, 1000} x method {regression, pmm}, 24 cells in that order.
std::vector<ExperimentCell> default_grid_cells(const GridConfig& config);

std::vector<CellOutput> run_grid(const GridConfig& config);

} // namespace milab
