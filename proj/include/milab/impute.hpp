#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "milab/rng.hpp"
#include "milab/stat_core.hpp"

namespace milab {

enum class Method { Regression, Pmm };

// Which coefficients score donors and recipients when computing the
// predicted means used for matching:
//   Type0 - both sides use the least-squares estimates
//   Type1 - recipients use the posterior draw, donors the estimates
//   Type2 - both sides use the posterior draw (default)
//
// With a single predictor, Type0 and Type2 reduce to matching on x itself.
// Type1 scores the two sides with different lines, so each posterior draw
// relocates every donor pool; that extra between-imputation spread widens
// the pooled intervals noticeably.
enum class MatchType { Type0 = 0, Type1 = 1, Type2 = 2 };

// One draw of (intercept, slope, residual variance) from the regression
// posterior under the noninformative prior.
struct PosteriorDraw {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_variance = 0.0;
};

struct ImputerConfig {
  Method method = Method::Regression;
  int donor_k = 5;
  MatchType match_type = MatchType::Type2;
};

// A completed copy of a Dataset. was_imputed marks exactly the cells that
// were filled in; observed values are carried over unchanged.
struct ImputedDataset {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::uint8_t> was_imputed;

  int n() const noexcept { return static_cast<int>(x.size()); }
};

// Residual variance scaled by dof/chi2(dof), then coefficients from the
// bivariate normal with covariance residual_variance * (X'X)^-1. A fit with
// zero residual variance returns the point estimates (variance 0) rather
// than failing, so exact-line data stays usable.
PosteriorDraw draw_posterior(const OlsFit& fit, RngStream& stream);

inline double predict(const PosteriorDraw& draw, double x) {
  return draw.intercept + draw.slope * x;
}

// Fill every missing cell with predicted mean + N(0, residual_variance)
// noise, drawn independently per cell in index order.
ImputedDataset impute_regression(const Dataset& data, const PosteriorDraw& draw,
                                 RngStream& stream);

// Indices of the k observed cases whose predicted values are nearest to
// predicted_missing. Ties at the pool boundary are all included, so the
// result can exceed k; indices come back sorted ascending.
std::vector<int> pmm_donors(double predicted_missing,
                            std::span<const double> predicted_observed, int k);

// Predictive mean matching: per missing cell, select donors among observed
// cases by closeness of predicted means (scored per cfg.match_type), then
// copy the observed y of one donor drawn uniformly from the pool. Every
// imputed value is an element of the observed y multiset.
ImputedDataset impute_pmm(const Dataset& data, const OlsFit& fit,
                          const PosteriorDraw& draw, const ImputerConfig& cfg,
                          RngStream& stream);

// One complete imputation pass: a posterior draw followed by the configured
// method, all consuming the given stream.
ImputedDataset impute_once(const Dataset& data, const OlsFit& fit,
                           const ImputerConfig& cfg, RngStream& stream);

// M completed copies. The fit is computed once from the observed cases
// (those never change across copies); copy m draws everything else from
// RngStream(seed, stream_id_base + m). M >= 2 or std::invalid_argument.
std::vector<ImputedDataset> multiply_impute(const Dataset& data,
                                            const ImputerConfig& cfg, int m_count,
                                            std::uint64_t seed,
                                            std::uint64_t stream_id_base);

} // namespace milab
