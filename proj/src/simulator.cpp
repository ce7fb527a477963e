#include "milab/simulator.hpp"

#include <bit>
#include <cmath>
#include <exception>
#include <stdexcept>

#include <omp.h>

namespace milab {

namespace {

constexpr int kMaxRedraws = 10;

// stream id field widths
constexpr int kMBits = 14;
constexpr int kRepBits = 40;

bool replicate_usable(const Dataset& data, const ExperimentCell& cell) {
  int observed = 0;
  double min_x = 0.0;
  double max_x = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.is_missing(i)) {
      continue;
    }
    if (observed == 0) {
      min_x = max_x = data.x[i];
    } else {
      min_x = std::min(min_x, data.x[i]);
      max_x = std::max(max_x, data.x[i]);
    }
    ++observed;
  }
  if (observed < 3 || !(max_x > min_x)) {
    return false;
  }
  if (cell.method == Method::Pmm && observed < cell.donor_k) {
    return false;
  }
  return true;
}

void validate_cell(const ExperimentCell& cell) {
  if (cell.reps < 1) {
    throw std::invalid_argument("cell: reps must be >= 1");
  }
  if (cell.m_imputations < 2) {
    throw std::invalid_argument("cell: m_imputations must be >= 2");
  }
  if (cell.donor_k < 1) {
    throw std::invalid_argument("cell: donor_k must be >= 1");
  }
  if (cell.n < 1) {
    throw std::invalid_argument("cell: n must be >= 1");
  }
  if (!(std::abs(cell.rho) <= 1.0)) {
    throw std::invalid_argument("cell: |rho| must be <= 1");
  }
  if (cell.m_imputations >= (1 << kMBits)) {
    throw std::invalid_argument("cell: m_imputations too large for stream ids");
  }
  if (static_cast<std::uint64_t>(cell.reps) >= (1ull << kRepBits)) {
    throw std::invalid_argument("cell: reps too large for stream ids");
  }
}

CellResult aggregate(const ExperimentCell& cell,
                     std::span<const ReplicateRecord> records) {
  CellResult result;
  result.true_slope = cell.rho;
  result.reps_completed = static_cast<int>(records.size());

  double sum_slope = 0.0;
  double sum_width = 0.0;
  double sum_mean = 0.0;
  double sum_sd = 0.0;
  long covered = 0;
  long redraws = 0;
  for (const ReplicateRecord& r : records) {
    sum_slope += r.slope;
    sum_width += r.ci_high - r.ci_low;
    sum_mean += r.y_mean;
    sum_sd += r.y_sd;
    if (r.ci_low <= cell.rho && cell.rho <= r.ci_high) {
      ++covered;
    }
    redraws += r.redraws;
  }
  const double reps = static_cast<double>(records.size());
  result.avg_estimate = sum_slope / reps;
  result.relative_bias_pct = relative_bias(result.avg_estimate, cell.rho);
  result.coverage_pct = 100.0 * static_cast<double>(covered) / reps;
  result.avg_ci_width = sum_width / reps;
  result.avg_y_mean = sum_mean / reps;
  result.avg_y_sd = sum_sd / reps;
  result.redraw_count = redraws;
  return result;
}

} // namespace

std::uint64_t condition_seed(const ExperimentCell& cell) {
  std::uint64_t h = cell.master_seed;
  h = mix64(h ^ std::bit_cast<std::uint64_t>(cell.rho));
  h = mix64(h ^ static_cast<std::uint64_t>(cell.mechanism.kind));
  const double mech_param = cell.mechanism.kind == MechanismKind::MarThreshold
                                ? cell.mechanism.threshold
                                : cell.mechanism.miss_prob;
  h = mix64(h ^ std::bit_cast<std::uint64_t>(mech_param));
  h = mix64(h ^ static_cast<std::uint64_t>(cell.n));
  return h;
}

std::uint64_t stream_id_for(StreamPurpose purpose, int attempt, int method_tag,
                            std::uint64_t rep, int m) {
  return (static_cast<std::uint64_t>(purpose) << 61) |
         (static_cast<std::uint64_t>(attempt) << 56) |
         (static_cast<std::uint64_t>(method_tag) << 54) |
         (rep << kMBits) | static_cast<std::uint64_t>(m);
}

int method_tag(Method method) {
  return method == Method::Regression ? 1 : 2;
}

Dataset generate_complete(const ExperimentCell& cell, std::uint64_t rep,
                          int attempt) {
  RngStream stream(condition_seed(cell),
                   stream_id_for(StreamPurpose::DataGen, attempt, 0, rep, 0));
  return gen_bivariate_normal(stream, cell.n, cell.rho);
}

Dataset generate_incomplete(const ExperimentCell& cell, std::uint64_t rep,
                            int attempt) {
  const Dataset complete = generate_complete(cell, rep, attempt);
  RngStream stream(condition_seed(cell),
                   stream_id_for(StreamPurpose::Ampute, attempt, 0, rep, 0));
  return ampute(complete, cell.mechanism, stream);
}

ReplicateRecord run_replicate(const ExperimentCell& cell, std::uint64_t rep) {
  int attempt = 0;
  Dataset incomplete = generate_incomplete(cell, rep, attempt);
  while (!replicate_usable(incomplete, cell)) {
    ++attempt;
    if (attempt > kMaxRedraws) {
      throw std::runtime_error("run_replicate: replicate still degenerate "
                               "after the redraw limit");
    }
    incomplete = generate_incomplete(cell, rep, attempt);
  }

  const ImputerConfig cfg{cell.method, cell.donor_k, cell.match_type};
  const std::uint64_t base =
      stream_id_for(StreamPurpose::Impute, attempt, method_tag(cell.method),
                    rep, 0);
  const std::vector<ImputedDataset> copies = multiply_impute(
      incomplete, cfg, cell.m_imputations, condition_seed(cell), base);

  std::vector<PerImputationEstimate> slopes;
  slopes.reserve(copies.size());
  double sum_mean = 0.0;
  double sum_sd = 0.0;
  for (const ImputedDataset& copy : copies) {
    const CompletedAnalysis analysis = analyze_completed(copy);
    slopes.push_back(analysis.slope);
    sum_mean += analysis.y_mean.estimate;
    sum_sd += analysis.y_sd;
  }
  const PooledEstimate pooled = pool(slopes, 0.95);

  ReplicateRecord record;
  record.slope = pooled.point;
  record.se = pooled.se;
  record.ci_low = pooled.ci_low;
  record.ci_high = pooled.ci_high;
  record.y_mean = sum_mean / static_cast<double>(copies.size());
  record.y_sd = sum_sd / static_cast<double>(copies.size());
  record.redraws = attempt;
  return record;
}

CellOutput run_cell_serial(const ExperimentCell& cell) {
  validate_cell(cell);
  std::vector<ReplicateRecord> records(cell.reps);
  for (int rep = 0; rep < cell.reps; ++rep) {
    records[rep] = run_replicate(cell, static_cast<std::uint64_t>(rep));
  }
  CellResult result = aggregate(cell, records);
  return CellOutput{cell, result, std::move(records)};
}

CellOutput run_cell(const ExperimentCell& cell, int threads) {
  validate_cell(cell);
  const int num_threads = threads > 0 ? threads : omp_get_max_threads();
  std::vector<ReplicateRecord> records(cell.reps);
  std::exception_ptr failure = nullptr;

#pragma omp parallel for schedule(dynamic) num_threads(num_threads)
  for (int rep = 0; rep < cell.reps; ++rep) {
    try {
      records[rep] = run_replicate(cell, static_cast<std::uint64_t>(rep));
    } catch (...) {
#pragma omp critical(milab_run_cell_failure)
      {
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  CellResult result = aggregate(cell, records);
  return CellOutput{cell, result, std::move(records)};
}

std::optional<double> relative_bias(double avg, double truth) {
  if (truth == 0.0) {
    return std::nullopt;
  }
  return 100.0 * (avg - truth) / truth;
}

double coverage(std::span<const std::pair<double, double>> intervals,
                double truth) {
  if (intervals.empty()) {
    throw std::invalid_argument("coverage: no intervals");
  }
  long covered = 0;
  for (const auto& [low, high] : intervals) {
    if (low <= truth && truth <= high) {
      ++covered;
    }
  }
  return 100.0 * static_cast<double>(covered) /
         static_cast<double>(intervals.size());
}

std::vector<ExperimentCell> default_grid_cells(const GridConfig& config) {
  const Mechanism mechanisms[] = {Mechanism::mar(config.mar_threshold),
                                  Mechanism::mcar(config.mcar_miss_prob)};
  const double rhos[] = {0.0, 0.4, 0.8};
  const int sizes[] = {200, 1000};
  const Method methods[] = {Method::Regression, Method::Pmm};

  std::vector<ExperimentCell> cells;
  cells.reserve(24);
  for (const Mechanism& mech : mechanisms) {
    for (double rho : rhos) {
      for (int n : sizes) {
        for (Method method : methods) {
          ExperimentCell cell;
          cell.rho = rho;
          cell.mechanism = mech;
          cell.n = n;
          cell.method = method;
          cell.match_type = config.match_type;
          cell.reps = config.reps;
          cell.m_imputations = config.m_imputations;
          cell.donor_k = config.donor_k;
          cell.master_seed = config.master_seed;
          cells.push_back(cell);
        }
      }
    }
  }
  return cells;
}

std::vector<CellOutput> run_grid(const GridConfig& config) {
  std::vector<CellOutput> outputs;
  const std::vector<ExperimentCell> cells = default_grid_cells(config);
  outputs.reserve(cells.size());
  for (const ExperimentCell& cell : cells) {
    outputs.push_back(run_cell(cell, config.threads));
  }
  return outputs;
}

} // namespace milab
