#pragma once

#include <utility>

#include "fsmregret/machine.hpp"

namespace fsmregret {

// Exponential decaying memory: a uniform state grid driven by the update
// value = Q(value*(1-w) + x*w) with weight w = k^(-2/3) and Q the nearest-grid
// quantizer (ties upward). The threshold form below encodes the same map.
struct EdmParams {
  int k = 0;
  double first_state = 0.0;  // k^(-1/3)
  double delta = 0.0;        // (1 - 2 k^(-1/3)) / (k - 1)
  double weight = 0.0;       // k^(-2/3)
};

/// Grid geometry for k states. Throws InfeasibleError for k < 9, where the
/// state interval [k^(-1/3), 1-k^(-1/3)] degenerates.
EdmParams edm_params(int k);

/// Quantizer index of a raw value on the grid (nearest state, ties upward).
int edm_quantize(const EdmParams& p, double value);

/// One step of the direct update rule; reference path for the threshold form.
int edm_update(const EdmParams& p, int state, double x);

/// The machine in threshold form; clipping to [0,1] trims unreachable jumps.
Machine build_edm(int k);

// Worst-case circle rider: alternating full up-jumps of m states and full
// down-jumps of m-1 states that revisits its start after 2m-1 steps.
struct EdmAdversary {
  int m = 0;
  double xi = 0.0;
  std::vector<int> circle;            // expected state tour, period 2m-1
  std::vector<double> samples_limit;  // interval-edge sample values
  std::vector<double> samples;        // xi-nudged, directly simulable
  double predicted_regret = 0.0;      // closed form at the limit samples
};

/// Builds the adversarial circle for k states. Throws InfeasibleError when the
/// circle does not fit the grid or a sample leaves [0,1].
EdmAdversary edm_adversary(int k, double xi = 1e-9);

/// (lower, upper) bounds on the worst-case regret of the k-state machine.
std::pair<double, double> edm_bounds(int k);

}  // namespace fsmregret
