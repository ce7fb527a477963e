#include "milab/impute.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace milab {

PosteriorDraw draw_posterior(const OlsFit& fit, RngStream& stream) {
  if (fit.dof < 1) {
    throw std::invalid_argument("draw_posterior: fit needs dof >= 1");
  }
  if (fit.residual_variance == 0.0) {
    return PosteriorDraw{fit.intercept, fit.slope, 0.0};
  }

  const double g = chi_squared(stream, fit.dof);
  const double sigma2 = fit.residual_variance * fit.dof / g;

  // Cholesky factor of sigma2 * (X'X)^-1 for the 2x2 case
  const double l00 = std::sqrt(sigma2 * fit.xtx_inv00);
  const double l10 = sigma2 * fit.xtx_inv01 / l00;
  double l11_sq = sigma2 * fit.xtx_inv11 - l10 * l10;
  if (l11_sq < 0.0) {
    l11_sq = 0.0; // rounding on a barely-PSD matrix
  }
  const double l11 = std::sqrt(l11_sq);

  const double z0 = standard_normal(stream);
  const double z1 = standard_normal(stream);

  PosteriorDraw draw;
  draw.intercept = fit.intercept + l00 * z0;
  draw.slope = fit.slope + l10 * z0 + l11 * z1;
  draw.residual_variance = sigma2;
  return draw;
}

ImputedDataset impute_regression(const Dataset& data, const PosteriorDraw& draw,
                                 RngStream& stream) {
  ImputedDataset out;
  out.x = data.x;
  out.y = data.y;
  out.was_imputed.assign(data.x.size(), 0);
  const double sigma = std::sqrt(draw.residual_variance);
  for (int i = 0; i < data.n(); ++i) {
    if (data.is_missing(i)) {
      out.y[i] = predict(draw, data.x[i]) + sigma * standard_normal(stream);
      out.was_imputed[i] = 1;
    }
  }
  return out;
}

namespace {

// Donor selection against a pre-sorted score column. Walks outward from the
// insertion point taking the closer side first, then widens the pool to
// every case tied with the k-th distance.
std::vector<int> donors_from_sorted(std::span<const double> sorted_scores,
                                    std::span<const int> original_index,
                                    double target, int k) {
  const int n = static_cast<int>(sorted_scores.size());
  const auto begin = sorted_scores.begin();
  int right = static_cast<int>(
      std::lower_bound(begin, sorted_scores.end(), target) - begin);
  int left = right - 1;

  double worst = 0.0;
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(k) + 4);
  for (int taken = 0; taken < k; ++taken) {
    const double dl = left >= 0 ? std::abs(sorted_scores[left] - target)
                                : std::numeric_limits<double>::infinity();
    const double dr = right < n ? std::abs(sorted_scores[right] - target)
                                : std::numeric_limits<double>::infinity();
    if (dl <= dr) {
      pool.push_back(left--);
      worst = dl;
    } else {
      pool.push_back(right++);
      worst = dr;
    }
  }
  // distances were taken in nondecreasing order, so `worst` is the pool
  // boundary; include everything tied with it
  while (left >= 0 && std::abs(sorted_scores[left] - target) == worst) {
    pool.push_back(left--);
  }
  while (right < n && std::abs(sorted_scores[right] - target) == worst) {
    pool.push_back(right++);
  }

  std::vector<int> result;
  result.reserve(pool.size());
  for (int pos : pool) {
    result.push_back(original_index[pos]);
  }
  std::sort(result.begin(), result.end());
  return result;
}

} // namespace

std::vector<int> pmm_donors(double predicted_missing,
                            std::span<const double> predicted_observed, int k) {
  const int n = static_cast<int>(predicted_observed.size());
  if (n == 0) {
    throw std::invalid_argument("pmm_donors: observed set is empty");
  }
  if (k < 1 || k > n) {
    throw std::invalid_argument("pmm_donors: k must lie in [1, n_observed]");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (predicted_observed[a] != predicted_observed[b]) {
      return predicted_observed[a] < predicted_observed[b];
    }
    return a < b;
  });
  std::vector<double> sorted_scores(n);
  for (int i = 0; i < n; ++i) {
    sorted_scores[i] = predicted_observed[order[i]];
  }
  return donors_from_sorted(sorted_scores, order, predicted_missing, k);
}

ImputedDataset impute_pmm(const Dataset& data, const OlsFit& fit,
                          const PosteriorDraw& draw, const ImputerConfig& cfg,
                          RngStream& stream) {
  std::vector<int> observed;
  observed.reserve(data.x.size());
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_missing(i)) {
      observed.push_back(i);
    }
  }
  const int n_obs = static_cast<int>(observed.size());
  if (n_obs == 0) {
    throw std::invalid_argument("impute_pmm: no observed cases");
  }
  if (cfg.donor_k < 1 || cfg.donor_k > n_obs) {
    throw std::invalid_argument("impute_pmm: donor_k must lie in [1, n_observed]");
  }

  const bool donors_use_draw = cfg.match_type == MatchType::Type2;
  const bool recipients_use_draw = cfg.match_type != MatchType::Type0;
  const auto donor_score = [&](double x) {
    return donors_use_draw ? predict(draw, x) : fit.intercept + fit.slope * x;
  };
  const auto recipient_score = [&](double x) {
    return recipients_use_draw ? predict(draw, x)
                               : fit.intercept + fit.slope * x;
  };

  // sort donors by score once; every recipient reuses the same ordering
  std::vector<int> order(n_obs);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> scores(n_obs);
  for (int j = 0; j < n_obs; ++j) {
    scores[j] = donor_score(data.x[observed[j]]);
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) {
      return scores[a] < scores[b];
    }
    return a < b;
  });
  std::vector<double> sorted_scores(n_obs);
  for (int j = 0; j < n_obs; ++j) {
    sorted_scores[j] = scores[order[j]];
  }

  ImputedDataset out;
  out.x = data.x;
  out.y = data.y;
  out.was_imputed.assign(data.x.size(), 0);
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_missing(i)) {
      continue;
    }
    const std::vector<int> pool = donors_from_sorted(
        sorted_scores, order, recipient_score(data.x[i]), cfg.donor_k);
    const int pick = pool[static_cast<int>(stream.uniform_below(pool.size()))];
    out.y[i] = data.y[observed[pick]];
    out.was_imputed[i] = 1;
  }
  return out;
}

ImputedDataset impute_once(const Dataset& data, const OlsFit& fit,
                           const ImputerConfig& cfg, RngStream& stream) {
  const PosteriorDraw draw = draw_posterior(fit, stream);
  if (cfg.method == Method::Regression) {
    return impute_regression(data, draw, stream);
  }
  return impute_pmm(data, fit, draw, cfg, stream);
}

std::vector<ImputedDataset> multiply_impute(const Dataset& data,
                                            const ImputerConfig& cfg, int m_count,
                                            std::uint64_t seed,
                                            std::uint64_t stream_id_base) {
  if (m_count < 2) {
    throw std::invalid_argument("multiply_impute: need at least 2 imputations");
  }
  const OlsFit fit = ols_observed(data);
  std::vector<ImputedDataset> copies;
  copies.reserve(m_count);
  for (int m = 0; m < m_count; ++m) {
    RngStream stream(seed, stream_id_base + static_cast<std::uint64_t>(m));
    copies.push_back(impute_once(data, fit, cfg, stream));
  }
  return copies;
}

} // namespace milab
