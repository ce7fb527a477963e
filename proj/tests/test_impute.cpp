#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "milab/impute.hpp"
#include "milab/missingness.hpp"

#include "oracles.hpp"

using milab::Dataset;
using milab::ImputedDataset;
using milab::ImputerConfig;
using milab::MatchType;
using milab::Mechanism;
using milab::Method;
using milab::OlsFit;
using milab::PosteriorDraw;
using milab::RngStream;

namespace {

Dataset mar_dataset(std::uint64_t seed, int n, double rho,
                    double threshold = -1.0) {
  RngStream gen(seed, 0);
  const Dataset complete = milab::gen_bivariate_normal(gen, n, rho);
  RngStream amp(seed, 1);
  return milab::ampute(complete, Mechanism::mar(threshold), amp);
}

std::multiset<double> observed_values(const Dataset& data) {
  std::multiset<double> values;
  for (int i = 0; i < data.n(); ++i) {
    if (!data.is_missing(i)) {
      values.insert(data.y[i]);
    }
  }
  return values;
}

} // namespace

TEST_SUITE("impute") {

TEST_CASE("posterior draw from an exact-fit design is a point mass") {
  Dataset data;
  data.x = {1, 2, 3};
  data.y = {2, 3, 4};
  data.y_missing = {0, 0, 0};
  const OlsFit fit = milab::ols_observed(data);
  REQUIRE(fit.residual_variance == 0.0);
  RngStream stream(3, 0);
  const PosteriorDraw draw = milab::draw_posterior(fit, stream);
  CHECK(draw.intercept == fit.intercept);
  CHECK(draw.slope == fit.slope);
  CHECK(draw.residual_variance == 0.0);
}

TEST_CASE("posterior slope draws center on the estimate") {
  RngStream gen(42, 5);
  const Dataset data = milab::gen_bivariate_normal(gen, 10000, 0.8);
  const OlsFit fit = milab::ols_observed(data);
  RngStream stream(42, 6);
  const int draws = 10000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    sum += milab::draw_posterior(fit, stream).slope;
  }
  const double mean_slope = sum / draws;
  const double posterior_sd = fit.slope_se();
  CHECK(std::abs(mean_slope - fit.slope) <
        3.0 * posterior_sd / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("posterior variance draws have the scaled inverse chi-squared mean") {
  // build a fit with dof exactly 20
  RngStream gen(42, 7);
  const Dataset data = milab::gen_bivariate_normal(gen, 22, 0.5);
  const OlsFit fit = milab::ols_observed(data);
  REQUIRE(fit.dof == 20);
  RngStream stream(42, 8);
  const int draws = 10000;
  double sum_ratio = 0.0;
  for (int i = 0; i < draws; ++i) {
    sum_ratio +=
        milab::draw_posterior(fit, stream).residual_variance /
        fit.residual_variance;
  }
  // E[dof / chi2(dof)] = dof / (dof - 2)
  CHECK(std::abs(sum_ratio / draws - 20.0 / 18.0) < 0.05);
}

TEST_CASE("predict is the fitted line") {
  CHECK(milab::predict(PosteriorDraw{0, 1, 0}, 2.0) == 2.0);
  CHECK(milab::predict(PosteriorDraw{1, 0, 0}, -5.0) == 1.0);
  CHECK(milab::predict(PosteriorDraw{1, 2, 0}, 3.0) == 7.0);
}

TEST_CASE("regression imputation leaves complete data untouched") {
  RngStream gen(9, 0);
  const Dataset data = milab::gen_bivariate_normal(gen, 50, 0.4);
  RngStream stream(9, 1);
  const ImputedDataset out =
      milab::impute_regression(data, PosteriorDraw{0.0, 0.8, 1.0}, stream);
  CHECK(out.y == data.y);
  for (std::uint8_t flag : out.was_imputed) {
    CHECK(flag == 0);
  }
}

TEST_CASE("noiseless regression imputation is exactly the fitted line") {
  Dataset data;
  data.x = {-2, -1.5, -1.2, 1.0, 2.0};
  data.y = {-1.6, -1.2, -0.96, std::nan(""), std::nan("")};
  data.y_missing = {0, 0, 0, 1, 1};
  RngStream stream(9, 2);
  const PosteriorDraw draw{0.0, 0.8, 0.0};
  const ImputedDataset out = milab::impute_regression(data, draw, stream);
  CHECK(out.y[3] == 0.8 * 1.0);
  CHECK(out.y[4] == 0.8 * 2.0);
  CHECK(out.was_imputed == std::vector<std::uint8_t>{0, 0, 0, 1, 1});
  // affine in x on the imputed cells
  for (int i = 3; i < 5; ++i) {
    CHECK(out.y[i] == draw.intercept + draw.slope * out.x[i]);
  }
}

TEST_CASE("regression imputation recovers the slope under MAR") {
  const Dataset data = mar_dataset(42, 10000, 0.8);
  const OlsFit fit = milab::ols_observed(data);
  RngStream stream(42, 9);
  const int copies = 100;
  double sum_slope = 0.0;
  for (int m = 0; m < copies; ++m) {
    const ImputedDataset out =
        milab::impute_regression(data, milab::draw_posterior(fit, stream),
                                 stream);
    sum_slope += milab::ols_fit(out.x, out.y).slope;
  }
  CHECK(sum_slope / copies == doctest::Approx(0.8).epsilon(0.025));
}

TEST_CASE("pmm_donors examples") {
  const std::vector<double> scores{0, 1, 2, 3, 4};
  CHECK(milab::pmm_donors(2.2, scores, 2) == std::vector<int>{2, 3});

  const std::vector<double> pair{2, 3};
  CHECK(milab::pmm_donors(2.5, pair, 1) == std::vector<int>{0, 1});

  CHECK_THROWS_AS(milab::pmm_donors(0.0, std::vector<double>{}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(milab::pmm_donors(0.0, scores, 0), std::invalid_argument);
  CHECK_THROWS_AS(milab::pmm_donors(0.0, scores, 6), std::invalid_argument);
}

TEST_CASE("pmm_donors matches the exhaustive oracle") {
  RngStream stream(42, 10);
  for (int instance = 0; instance < 100; ++instance) {
    const int n = 1 + static_cast<int>(stream.uniform_below(40));
    const int k = 1 + static_cast<int>(stream.uniform_below(n));
    std::vector<double> scores(n);
    for (auto& s : scores) {
      // small integer grid so exact distance ties actually occur
      s = static_cast<double>(stream.uniform_below(12));
    }
    const double target =
        0.5 * static_cast<double>(stream.uniform_below(25));
    CHECK(milab::pmm_donors(target, scores, k) ==
          oracle::donor_pool_bruteforce(target, scores, k));
  }
}

TEST_CASE("type0 donor pools are nearest-neighbor-in-x pools") {
  RngStream stream(42, 11);
  for (int instance = 0; instance < 50; ++instance) {
    const int n = 5 + static_cast<int>(stream.uniform_below(30));
    std::vector<double> x(n);
    for (auto& v : x) {
      v = milab::standard_normal(stream);
    }
    // positive-slope fitted line: scores are an increasing affine map of x
    const double intercept = milab::standard_normal(stream);
    const double slope = 0.1 + stream.uniform01();
    std::vector<double> scores(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = intercept + slope * x[i];
    }
    const double xi = milab::standard_normal(stream);
    const int k = 1 + static_cast<int>(stream.uniform_below(n));
    const auto by_score =
        milab::pmm_donors(intercept + slope * xi, scores, k);
    const auto by_x = oracle::donor_pool_bruteforce(xi, x, k);
    CHECK(by_score == by_x);
  }
}

TEST_CASE("pmm closure: every imputed value is an observed value") {
  const Dataset data = mar_dataset(43, 200, 0.8);
  const OlsFit fit = milab::ols_observed(data);
  const std::multiset<double> observed = observed_values(data);
  for (MatchType mt : {MatchType::Type0, MatchType::Type1, MatchType::Type2}) {
    RngStream stream(43, 12 + static_cast<int>(mt));
    const ImputedDataset out = milab::impute_pmm(
        data, fit, milab::draw_posterior(fit, stream),
        ImputerConfig{Method::Pmm, 5, mt}, stream);
    for (int i = 0; i < out.n(); ++i) {
      if (out.was_imputed[i]) {
        CHECK(observed.count(out.y[i]) > 0);
      }
    }
  }
}

TEST_CASE("a saturated donor pool samples all observed values uniformly") {
  // 10 observed, 1000 missing, k = n_obs: the pool is every observed case
  Dataset data;
  const int n_obs = 10;
  const int n_mis = 1000;
  for (int i = 0; i < n_obs; ++i) {
    data.x.push_back(-2.0 + 0.1 * i);
    data.y.push_back(static_cast<double>(i));
    data.y_missing.push_back(0);
  }
  for (int i = 0; i < n_mis; ++i) {
    data.x.push_back(0.5 + 0.001 * i);
    data.y.push_back(std::nan(""));
    data.y_missing.push_back(1);
  }
  const OlsFit fit = milab::ols_observed(data);
  RngStream stream(44, 0);
  const ImputedDataset out = milab::impute_pmm(
      data, fit, milab::draw_posterior(fit, stream),
      ImputerConfig{Method::Pmm, n_obs, MatchType::Type1}, stream);
  std::vector<int> counts(n_obs, 0);
  for (int i = n_obs; i < out.n(); ++i) {
    CHECK(out.was_imputed[i]);
    const int donor = static_cast<int>(out.y[i]);
    REQUIRE(donor >= 0);
    REQUIRE(donor < n_obs);
    ++counts[donor];
  }
  for (int c : counts) {
    // Binomial(1000, 1/10): 4 sigma around the mean of 100
    CHECK(c > 60);
    CHECK(c < 140);
  }
}

TEST_CASE("pmm flattens the slope under MAR") {
  const Dataset data = mar_dataset(42, 200, 0.8);
  const OlsFit fit = milab::ols_observed(data);
  RngStream stream(42, 13);
  const int copies = 100;
  double sum_slope = 0.0;
  for (int m = 0; m < copies; ++m) {
    const ImputedDataset out = milab::impute_pmm(
        data, fit, milab::draw_posterior(fit, stream),
        ImputerConfig{Method::Pmm, 5, MatchType::Type1}, stream);
    sum_slope += milab::ols_fit(out.x, out.y).slope;
  }
  CHECK(std::abs(sum_slope / copies - 0.1) < 0.1);
}

TEST_CASE("multiply_impute masks, determinism and closure") {
  const Dataset data = mar_dataset(45, 200, 0.8);
  const ImputerConfig cfg{Method::Pmm, 5, MatchType::Type1};
  const auto copies = milab::multiply_impute(data, cfg, 10, 45, 1000);
  CHECK(copies.size() == 10);
  const std::multiset<double> observed = observed_values(data);
  for (const ImputedDataset& copy : copies) {
    CHECK(copy.n() == data.n());
    for (int i = 0; i < copy.n(); ++i) {
      CHECK(static_cast<bool>(copy.was_imputed[i]) == data.is_missing(i));
      if (!data.is_missing(i)) {
        CHECK(copy.y[i] == data.y[i]);
      } else {
        CHECK(observed.count(copy.y[i]) > 0);
      }
    }
  }

  const auto again = milab::multiply_impute(data, cfg, 10, 45, 1000);
  for (std::size_t m = 0; m < copies.size(); ++m) {
    CHECK(copies[m].y == again[m].y);
  }
  // a different stream base gives different imputations
  const auto shifted = milab::multiply_impute(data, cfg, 10, 45, 2000);
  CHECK(shifted[0].y != copies[0].y);

  CHECK_THROWS_AS(milab::multiply_impute(data, cfg, 1, 45, 0),
                  std::invalid_argument);
}

TEST_CASE("multiply_impute propagates degenerate designs") {
  Dataset data;
  data.x = {0, 1, 2, 3};
  data.y = {std::nan(""), std::nan(""), 1.0, 2.0};
  data.y_missing = {1, 1, 0, 0};
  const ImputerConfig cfg{Method::Regression, 5, MatchType::Type1};
  CHECK_THROWS_AS(milab::multiply_impute(data, cfg, 5, 1, 0),
                  milab::DegenerateDesignError);
}

TEST_CASE("imputed values center on the observed mean under MCAR at rho 0") {
  // Distributional check: per dataset, (imputed mean - observed mean),
  // averaged over datasets and imputations, is centered on zero. A single
  // dataset would not do: at rho = 0 the drawn slope is pure noise, so PMM
  // concentrates each copy on a wandering donor neighborhood and the
  // per-dataset expectation is a weighted donor mean.
  for (Method method : {Method::Regression, Method::Pmm}) {
    const int datasets = 40;
    const int copies = 20;
    std::vector<double> gaps;
    gaps.reserve(datasets);
    for (int d = 0; d < datasets; ++d) {
      RngStream gen(46, 10 * d);
      const Dataset complete = milab::gen_bivariate_normal(gen, 1000, 0.0);
      RngStream amp(46, 10 * d + 1);
      const Dataset data = milab::ampute(complete, Mechanism::mcar(0.5), amp);
      const OlsFit fit = milab::ols_observed(data);

      double observed_mean = 0.0;
      int observed_n = 0;
      for (int i = 0; i < data.n(); ++i) {
        if (!data.is_missing(i)) {
          observed_mean += data.y[i];
          ++observed_n;
        }
      }
      observed_mean /= observed_n;

      RngStream stream(46, 10 * d + 2 + static_cast<int>(method));
      double sum_means = 0.0;
      for (int m = 0; m < copies; ++m) {
        const ImputedDataset out = milab::impute_once(
            data, fit, ImputerConfig{method, 5, MatchType::Type1}, stream);
        double sum = 0.0;
        int count = 0;
        for (int i = 0; i < out.n(); ++i) {
          if (out.was_imputed[i]) {
            sum += out.y[i];
            ++count;
          }
        }
        sum_means += sum / count;
      }
      gaps.push_back(sum_means / copies - observed_mean);
    }
    const double mean_gap = oracle::mean(gaps);
    const double mc_se =
        oracle::sample_sd(gaps) / std::sqrt(double(datasets));
    CHECK(std::abs(mean_gap) < 3.0 * mc_se);
  }
}

} // TEST_SUITE
