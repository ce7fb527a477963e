#include "doctest.h"

#include <cmath>
#include <vector>

#include "milab/missingness.hpp"

#include "oracles.hpp"

using milab::Dataset;
using milab::Mechanism;
using milab::RngStream;

namespace {

Dataset complete_dataset(std::vector<double> x, std::vector<double> y) {
  Dataset d;
  d.x = std::move(x);
  d.y = std::move(y);
  d.y_missing.assign(d.x.size(), 0);
  return d;
}

} // namespace

TEST_SUITE("missingness") {

TEST_CASE("mar deletes above the threshold and keeps below") {
  const Dataset data = complete_dataset({-2.0, 0.0, -1.0, 3.0}, {1, 2, 3, 4});
  RngStream stream(1, 0);
  const Dataset out = milab::ampute(data, Mechanism::mar(-1.0), stream);
  CHECK_FALSE(out.is_missing(0)); // x = -2
  CHECK(out.is_missing(1));       // x = 0
  CHECK_FALSE(out.is_missing(2)); // x = -1, not strictly above
  CHECK(out.is_missing(3));       // x = 3
  CHECK(out.y[0] == 1.0);
  CHECK(out.y[2] == 3.0);
  CHECK(std::isnan(out.y[1]));
}

TEST_CASE("mcar boundary probabilities") {
  const Dataset data =
      complete_dataset({0, 1, 2, 3, 4}, {10, 11, 12, 13, 14});
  RngStream stream(1, 1);
  const Dataset none = milab::ampute(data, Mechanism::mcar(0.0), stream);
  CHECK(none.observed_count() == 5);
  CHECK(none.y == data.y);

  const Dataset all = milab::ampute(data, Mechanism::mcar(1.0), stream);
  CHECK(all.observed_count() == 0);
}

TEST_CASE("mar missing fraction matches the normal tail mass") {
  RngStream gen(42, 0);
  const Dataset data = milab::gen_bivariate_normal(gen, 1000000, 0.8);
  RngStream amp(42, 1);
  const Dataset out = milab::ampute(data, Mechanism::mar(-1.0), amp);
  const double fraction = milab::missing_fraction(out);
  CHECK(fraction == doctest::Approx(0.8413).epsilon(0.0024));
  CHECK(std::abs(fraction - oracle::phi(1.0)) < 0.002);
}

TEST_CASE("mcar missing fraction approaches miss_prob") {
  RngStream gen(42, 2);
  const Dataset data = milab::gen_bivariate_normal(gen, 1000000, 0.8);
  RngStream amp(42, 3);
  const Dataset out = milab::ampute(data, Mechanism::mcar(0.84), amp);
  CHECK(milab::missing_fraction(out) == doctest::Approx(0.84).epsilon(0.0024));
}

TEST_CASE("mar mask is a pure function of x") {
  RngStream gen(5, 0);
  const Dataset data = milab::gen_bivariate_normal(gen, 5000, 0.4);
  RngStream amp_a(5, 1);
  RngStream amp_b(99, 77); // a completely different stream
  const Dataset a = milab::ampute(data, Mechanism::mar(-1.0), amp_a);
  const Dataset b = milab::ampute(data, Mechanism::mar(-1.0), amp_b);
  CHECK(a.y_missing == b.y_missing);
  // the MAR property, literally: the mask is recomputable from x alone
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a.is_missing(i) == (data.x[i] > -1.0));
  }
}

TEST_CASE("ampute never alters x or surviving y") {
  RngStream gen(6, 0);
  const Dataset data = milab::gen_bivariate_normal(gen, 2000, 0.8);
  for (const Mechanism& mech : {Mechanism::mar(-1.0), Mechanism::mcar(0.5)}) {
    RngStream amp(6, 1);
    const Dataset out = milab::ampute(data, mech, amp);
    CHECK(out.x == data.x);
    for (int i = 0; i < out.n(); ++i) {
      if (!out.is_missing(i)) {
        CHECK(out.y[i] == data.y[i]);
      }
    }
  }
}

TEST_CASE("amputing an incomplete dataset is rejected") {
  Dataset data = complete_dataset({0, 1}, {0, 1});
  data.y_missing[0] = 1;
  RngStream stream(1, 2);
  CHECK_THROWS_AS(milab::ampute(data, Mechanism::mar(-1.0), stream),
                  std::invalid_argument);
}

TEST_CASE("invalid mechanism parameters are rejected") {
  const Dataset data = complete_dataset({0, 1}, {0, 1});
  RngStream stream(1, 3);
  CHECK_THROWS_AS(milab::ampute(data, Mechanism::mcar(1.5), stream),
                  std::invalid_argument);
  CHECK_THROWS_AS(milab::ampute(data, Mechanism::mcar(-0.1), stream),
                  std::invalid_argument);
  Mechanism bad_mar = Mechanism::mar(std::nan(""));
  CHECK_THROWS_AS(milab::ampute(data, bad_mar, stream), std::invalid_argument);
}

TEST_CASE("missing_fraction counting") {
  Dataset data = complete_dataset(std::vector<double>(100, 0.5),
                                  std::vector<double>(100, 1.0));
  CHECK(milab::missing_fraction(data) == 0.0);
  for (int i = 0; i < 84; ++i) {
    data.y_missing[i] = 1;
  }
  CHECK(milab::missing_fraction(data) == doctest::Approx(0.84));
  for (int i = 84; i < 100; ++i) {
    data.y_missing[i] = 1;
  }
  CHECK(milab::missing_fraction(data) == 1.0);
}

} // TEST_SUITE
