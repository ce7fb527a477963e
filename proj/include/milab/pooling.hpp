#pragma once

#include <span>

#include "milab/impute.hpp"
#include "milab/stat_core.hpp"

namespace milab {

// One analysis of one completed dataset: point estimate, the standard error
// it would have were the data complete, and the complete-data degrees of
// freedom.
struct PerImputationEstimate {
  double estimate = 0.0;
  double se = 0.0;
  int dof_complete = 0;
};

// Combined multiple-imputation estimate: point, variance decomposition,
// small-sample degrees of freedom and t interval.
struct PooledEstimate {
  double point = 0.0;
  double within_var = 0.0;
  double between_var = 0.0;
  double total_var = 0.0;
  double se = 0.0;
  double dof = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  int m = 0;
};

// Student-t quantile for real-valued dof, accurate to better than 1e-8
// relative. p in (0, 1), dof > 0.
double student_t_quantile(double p, double dof);

// Regularized incomplete beta I_x(a, b); exposed for the quantile tests.
double incomplete_beta(double a, double b, double x);

// Small-sample degrees of freedom for the pooled t interval: the harmonic
// combination of (m-1)/r^2 and the observed-data component
// dof_complete*(dof_complete+1)/(dof_complete+3)*(1-r), where
// r = (1+1/m)*between/total. Never exceeds dof_complete; when between_var
// is zero only the observed-data component remains.
double barnard_rubin_dof(double within_var, double between_var, int m,
                         int dof_complete);

// Combine m per-imputation analyses: the pooled point is their mean,
// within_var the mean squared se, between_var their sample variance
// (divisor m-1), total_var = within + (1+1/m)*between, and the interval a
// t interval on barnard_rubin_dof degrees of freedom. m >= 2 and equal
// dof_complete across entries, or std::invalid_argument.
PooledEstimate pool(std::span<const PerImputationEstimate> estimates,
                    double level = 0.95);

// Per-parameter analyses of one completed dataset.
struct CompletedAnalysis {
  PerImputationEstimate slope;
  PerImputationEstimate intercept;
  PerImputationEstimate y_mean;
  double y_sd = 0.0; // descriptive only, no se
};

CompletedAnalysis analyze_completed(const ImputedDataset& imputed);

} // namespace milab
