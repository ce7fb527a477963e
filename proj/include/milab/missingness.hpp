#pragma once

#include "milab/rng.hpp"
#include "milab/stat_core.hpp"

namespace milab {

enum class MechanismKind { MarThreshold, Mcar };

// Deletion rule applied to a complete outcome column. MarThreshold deletes
// y wherever x exceeds the threshold (a function of observed x only, so the
// pattern is missing-at-random); Mcar deletes each y independently with
// probability miss_prob.
struct Mechanism {
  MechanismKind kind = MechanismKind::MarThreshold;
  double threshold = -1.0; // MarThreshold only
  double miss_prob = 0.84; // Mcar only

  static Mechanism mar(double threshold = -1.0) {
    return Mechanism{MechanismKind::MarThreshold, threshold, 0.0};
  }
  static Mechanism mcar(double miss_prob = 0.84) {
    return Mechanism{MechanismKind::Mcar, 0.0, miss_prob};
  }
};

// Delete outcome values from a complete dataset. The input must have no
// missing y (std::invalid_argument otherwise). x and retained y values are
// carried over untouched. MarThreshold never consumes the stream.
Dataset ampute(const Dataset& data, const Mechanism& mech, RngStream& stream);

// Fraction of y cells that are missing.
double missing_fraction(const Dataset& data);

} // namespace milab
