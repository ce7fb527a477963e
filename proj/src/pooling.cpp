#include "milab/pooling.hpp"

#include <cmath>
#include <limits>

namespace milab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Continued fraction for the regularized incomplete beta (modified Lentz).
double beta_cont_fraction(double a, double b, double x) {
  constexpr double eps = 3.0e-16;
  constexpr double tiny = 1.0e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) {
    d = tiny;
  }
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) {
      d = tiny;
    }
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) {
      c = tiny;
    }
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) {
      d = tiny;
    }
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) {
      c = tiny;
    }
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) {
      break;
    }
  }
  return h;
}

double student_t_cdf(double t, double dof) {
  const double x = dof / (dof + t * t);
  const double tail = 0.5 * incomplete_beta(0.5 * dof, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_pdf(double t, double dof) {
  const double log_pdf = std::lgamma(0.5 * (dof + 1.0)) -
                         std::lgamma(0.5 * dof) - 0.5 * std::log(dof * kPi) -
                         0.5 * (dof + 1.0) * std::log1p(t * t / dof);
  return std::exp(log_pdf);
}

} // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) {
    return 0.0;
  }
  if (x >= 1.0) {
    return 1.0;
  }
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_cont_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

// Bracketed Newton iteration on the CDF; bisection whenever a Newton step
// leaves the bracket.
double student_t_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("student_t_quantile: p must lie in (0, 1)");
  }
  if (!(dof > 0.0)) {
    throw std::invalid_argument("student_t_quantile: dof must be positive");
  }
  if (p == 0.5) {
    return 0.0;
  }
  const bool upper = p > 0.5;
  const double target = upper ? p : 1.0 - p;

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, dof) < target && hi < 1.0e300) {
    lo = hi;
    hi *= 2.0;
  }

  double t = normal_icdf(target);
  if (!(t > lo && t < hi)) {
    t = 0.5 * (lo + hi);
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double f = student_t_cdf(t, dof) - target;
    if (f > 0.0) {
      hi = t;
    } else {
      lo = t;
    }
    const double dens = student_t_pdf(t, dof);
    double next = dens > 0.0 ? t - f / dens : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
    }
    const double delta = std::abs(next - t);
    t = next;
    if (delta <= 1.0e-14 * std::max(1.0, std::abs(t))) {
      break;
    }
  }
  return upper ? t : -t;
}

double barnard_rubin_dof(double within_var, double between_var, int m,
                         int dof_complete) {
  if (m < 2) {
    throw std::invalid_argument("barnard_rubin_dof: m must be >= 2");
  }
  if (dof_complete < 1) {
    throw std::invalid_argument("barnard_rubin_dof: dof_complete must be >= 1");
  }
  if (within_var < 0.0 || between_var < 0.0) {
    throw std::invalid_argument("barnard_rubin_dof: variances must be >= 0");
  }
  const double total = within_var + (1.0 + 1.0 / m) * between_var;
  if (!(total > 0.0)) {
    throw std::invalid_argument("barnard_rubin_dof: total variance is zero");
  }
  const double nu_com = static_cast<double>(dof_complete);
  const double r = (1.0 + 1.0 / m) * between_var / total;
  const double nu_obs = nu_com * (nu_com + 1.0) / (nu_com + 3.0) * (1.0 - r);
  if (r <= 0.0) {
    return nu_obs;
  }
  const double nu_large = (m - 1.0) / (r * r);
  return 1.0 / (1.0 / nu_large + 1.0 / nu_obs);
}

PooledEstimate pool(std::span<const PerImputationEstimate> estimates,
                    double level) {
  const int m = static_cast<int>(estimates.size());
  if (m < 2) {
    throw std::invalid_argument("pool: need at least 2 imputations");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("pool: level must lie in (0, 1)");
  }
  const int dof_complete = estimates[0].dof_complete;
  for (const PerImputationEstimate& e : estimates) {
    if (e.dof_complete != dof_complete) {
      throw std::invalid_argument("pool: dof_complete differs across imputations");
    }
  }

  double point = 0.0;
  double within = 0.0;
  for (const PerImputationEstimate& e : estimates) {
    point += e.estimate;
    within += e.se * e.se;
  }
  point /= m;
  within /= m;

  double between = 0.0;
  for (const PerImputationEstimate& e : estimates) {
    const double d = e.estimate - point;
    between += d * d;
  }
  between /= (m - 1);

  PooledEstimate pooled;
  pooled.point = point;
  pooled.within_var = within;
  pooled.between_var = between;
  pooled.total_var = within + (1.0 + 1.0 / m) * between;
  pooled.se = std::sqrt(pooled.total_var);
  pooled.dof = barnard_rubin_dof(within, between, m, dof_complete);
  pooled.level = level;
  pooled.m = m;
  const double t = student_t_quantile(0.5 * (1.0 + level), pooled.dof);
  pooled.ci_low = point - t * pooled.se;
  pooled.ci_high = point + t * pooled.se;
  return pooled;
}

CompletedAnalysis analyze_completed(const ImputedDataset& imputed) {
  const int n = imputed.n();
  const OlsFit fit = ols_fit(imputed.x, imputed.y);

  double mean = 0.0;
  for (double v : imputed.y) {
    mean += v;
  }
  mean /= n;
  double ss = 0.0;
  for (double v : imputed.y) {
    const double d = v - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1));

  CompletedAnalysis analysis;
  analysis.slope = PerImputationEstimate{fit.slope, fit.slope_se(), fit.dof};
  analysis.intercept =
      PerImputationEstimate{fit.intercept, fit.intercept_se(), fit.dof};
  analysis.y_mean = PerImputationEstimate{mean, sd / std::sqrt(n), n - 1};
  analysis.y_sd = sd;
  return analysis;
}

} // namespace milab
