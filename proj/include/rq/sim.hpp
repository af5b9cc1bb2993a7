#pragma once

#include "rq/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rq {

struct SimConfig {
  std::uint64_t seed = 1;
  long warmup_events = 200000;  // long transients at high load
  long measured_events = 1000000;
  int replications = 8;
  long watchdog_orbit = 10000000;  // instability diagnostic threshold
};

struct SimResult {
  // continuous-time averages
  double en1 = 0.0, en2 = 0.0;
  double p_busy = 0.0;
  double ci1 = 0.0, ci2 = 0.0, ci_busy = 0.0;  // 95% half-widths
  // departure-epoch averages (embedded chain seen by the transform for
  // general-service variants)
  double den1 = 0.0, den2 = 0.0;
  double dci1 = 0.0, dci2 = 0.0;
  long events = 0;
  bool watchdog_tripped = false;
};

// Event-driven simulation of the exact dynamics: Poisson (batch) arrivals,
// idle-server admission with priority split p1 on mixed batches, constant
// retrial rates (xi*mu1*, (1-xi)*mu2*) when both orbits are occupied and the
// solo rates otherwise, busy-server arrivals routed entirely to the orbits.
// Replications run with derived RNG streams; CIs are across replications.
SimResult simulate(const ModelSpec& model, const SimConfig& cfg);

struct SweepRow {
  SimResult result;
  std::string error;  // empty on success
};

// one simulate per model, seeds derived as cfg.seed + index
std::vector<SweepRow> sweep_simulate(const std::vector<ModelSpec>& models,
                                     const SimConfig& cfg);

}  // namespace rq
