#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "milab/rng.hpp"

namespace milab {

// Thrown when a regression design carries no usable information: fewer than
// three cases or a constant predictor.
class DegenerateDesignError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Paired predictor/outcome columns. The outcome may have holes: y[i] is NaN
// exactly where y_missing[i] is set, so accidental reads of a deleted cell
// poison downstream arithmetic instead of silently passing.
struct Dataset {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::uint8_t> y_missing;

  int n() const noexcept { return static_cast<int>(x.size()); }
  bool is_missing(int i) const noexcept { return y_missing[i] != 0; }
  int observed_count() const noexcept;
};

// Least-squares fit of y on [1, x] with the pieces a posterior draw needs.
struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double residual_variance = 0.0; // unbiased, divisor n_obs - 2
  // (X'X)^-1 of the design on the fitted cases
  double xtx_inv00 = 0.0;
  double xtx_inv01 = 0.0;
  double xtx_inv11 = 0.0;
  int n_obs = 0;
  int dof = 0; // n_obs - 2

  double slope_se() const;
  double intercept_se() const;
};

// Inverse standard-normal CDF (rational approximation, full double
// accuracy). Throws std::invalid_argument outside (0, 1).
double normal_icdf(double p);

// One N(0,1) draw via the inverse CDF.
double standard_normal(RngStream& stream);

// One chi-squared draw; dof >= 1 or std::invalid_argument.
double chi_squared(RngStream& stream, int dof);

// One gamma(shape, 1) draw; shape > 0.
double gamma_variate(RngStream& stream, double shape);

// n pairs with X ~ N(0,1) and Y = rho*X + sqrt(1-rho^2)*Z, Z ~ N(0,1)
// independent; all y present. |rho| <= 1 and n >= 1 or
// std::invalid_argument.
Dataset gen_bivariate_normal(RngStream& stream, int n, double rho);

// OLS on fully paired columns (every case used).
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

// OLS restricted to the cases with y observed.
OlsFit ols_observed(const Dataset& data);

} // namespace milab
