#include "milab/stat_core.hpp"

#include <cmath>
#include <limits>

namespace milab {

namespace {

// Neumaier compensated accumulator. Terms are always added in index order,
// so a given input yields the same sum on every run and thread count.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }

  double value() const noexcept { return sum + carry; }
};

} // namespace

int Dataset::observed_count() const noexcept {
  int count = 0;
  for (std::uint8_t m : y_missing) {
    if (m == 0) ++count;
  }
  return count;
}

double OlsFit::slope_se() const {
  return std::sqrt(residual_variance * xtx_inv11);
}

double OlsFit::intercept_se() const {
  return std::sqrt(residual_variance * xtx_inv00);
}

// Wichura's PPND16 rational approximation, accurate to roughly one ulp over
// the whole open interval. Branches on the central region and the two tail
// regimes of sqrt(-log(min(p, 1-p))).
double normal_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_icdf: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }

  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    value = num / den;
  }
  return (q < 0.0) ? -value : value;
}

double standard_normal(RngStream& stream) {
  return normal_icdf(stream.uniform_open01());
}

// Marsaglia-Tsang squeeze method. Rejection consumes a variable number of
// variates, which is fine here: every consumer owns a dedicated substream.
double gamma_variate(RngStream& stream, double shape) {
  if (!(shape > 0.0)) {
    throw std::invalid_argument("gamma_variate: shape must be positive");
  }
  if (shape < 1.0) {
    const double g = gamma_variate(stream, shape + 1.0);
    const double u = stream.uniform_open01();
    return g * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = standard_normal(stream);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform_open01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) {
      return d * v;
    }
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

double chi_squared(RngStream& stream, int dof) {
  if (dof < 1) {
    throw std::invalid_argument("chi_squared: dof must be >= 1");
  }
  return 2.0 * gamma_variate(stream, 0.5 * static_cast<double>(dof));
}

Dataset gen_bivariate_normal(RngStream& stream, int n, double rho) {
  if (n < 1) {
    throw std::invalid_argument("gen_bivariate_normal: n must be >= 1");
  }
  if (!(std::abs(rho) <= 1.0)) {
    throw std::invalid_argument("gen_bivariate_normal: |rho| must be <= 1");
  }
  Dataset data;
  data.x.resize(n);
  data.y.resize(n);
  data.y_missing.assign(n, 0);
  const double resid_scale = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < n; ++i) {
    const double xi = standard_normal(stream);
    const double zi = standard_normal(stream);
    data.x[i] = xi;
    data.y[i] = rho * xi + resid_scale * zi;
  }
  return data;
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  const int n = static_cast<int>(x.size());
  if (n != static_cast<int>(y.size())) {
    throw std::invalid_argument("ols_fit: column lengths differ");
  }
  if (n < 3) {
    throw DegenerateDesignError("ols_fit: need at least 3 cases");
  }

  CompensatedSum sum_x;
  CompensatedSum sum_y;
  for (int i = 0; i < n; ++i) {
    sum_x.add(x[i]);
    sum_y.add(y[i]);
  }
  const double mean_x = sum_x.value() / n;
  const double mean_y = sum_y.value() / n;

  CompensatedSum sxx;
  CompensatedSum sxy;
  for (int i = 0; i < n; ++i) {
    const double dx = x[i] - mean_x;
    sxx.add(dx * dx);
    sxy.add(dx * (y[i] - mean_y));
  }
  const double centered_xx = sxx.value();
  if (!(centered_xx > 0.0)) {
    throw DegenerateDesignError("ols_fit: predictor is constant");
  }

  OlsFit fit;
  fit.slope = sxy.value() / centered_xx;
  fit.intercept = mean_y - fit.slope * mean_x;

  CompensatedSum rss;
  for (int i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    rss.add(r * r);
  }
  fit.n_obs = n;
  fit.dof = n - 2;
  fit.residual_variance = rss.value() / fit.dof;
  if (fit.residual_variance < 0.0) {
    fit.residual_variance = 0.0;
  }
  fit.xtx_inv00 = 1.0 / n + mean_x * mean_x / centered_xx;
  fit.xtx_inv01 = -mean_x / centered_xx;
  fit.xtx_inv11 = 1.0 / centered_xx;
  return fit;
}

OlsFit ols_observed(const Dataset& data) {
  std::vector<double> xs;
  std::vector<double> ys;
  xs.reserve(data.x.size());
  ys.reserve(data.x.size());
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_missing(i)) {
      xs.push_back(data.x[i]);
      ys.push_back(data.y[i]);
    }
  }
  if (static_cast<int>(xs.size()) < 3) {
    throw DegenerateDesignError("ols_observed: fewer than 3 observed cases");
  }
  return ols_fit(xs, ys);
}

} // namespace milab
