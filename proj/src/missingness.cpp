#include "milab/missingness.hpp"

#include <cmath>
#include <limits>

namespace milab {

Dataset ampute(const Dataset& data, const Mechanism& mech, RngStream& stream) {
  if (data.observed_count() != data.n()) {
    throw std::invalid_argument("ampute: input already has missing y values");
  }
  switch (mech.kind) {
  case MechanismKind::MarThreshold:
    if (!std::isfinite(mech.threshold)) {
      throw std::invalid_argument("ampute: MAR threshold must be finite");
    }
    break;
  case MechanismKind::Mcar:
    if (!(mech.miss_prob >= 0.0 && mech.miss_prob <= 1.0)) {
      throw std::invalid_argument("ampute: MCAR miss_prob must lie in [0, 1]");
    }
    break;
  }

  Dataset out = data;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < out.n(); ++i) {
    bool drop = false;
    if (mech.kind == MechanismKind::MarThreshold) {
      drop = out.x[i] > mech.threshold;
    } else {
      drop = stream.uniform01() < mech.miss_prob;
    }
    if (drop) {
      out.y[i] = nan;
      out.y_missing[i] = 1;
    }
  }
  return out;
}

double missing_fraction(const Dataset& data) {
  if (data.n() == 0) {
    return 0.0;
  }
  return static_cast<double>(data.n() - data.observed_count()) /
         static_cast<double>(data.n());
}

} // namespace milab
