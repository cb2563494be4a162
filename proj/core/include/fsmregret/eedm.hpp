#pragma once

#include <utility>

#include "fsmregret/machine.hpp"

namespace fsmregret {

// Segment-spaced decaying-memory machine. The regret budget R_d is split
// evenly between sample quantization and state spacing; [0,1] is carved into
// segments of constant jump limits, each gridded at its own gap.

struct SegmentSpec {
  double lo = 0.0;
  double hi = 0.0;       // half-open [lo, hi); the topmost segment closes at 1
  int max_up = 1;
  int max_down = 1;
  double delta(double half_budget) const;  // sqrt(R) / (2 max_up max_down)
};

/// Jump limits required at x for spacing budget R (both clamped to >= 1,
/// which keeps the gap defined in the edge segments).
std::pair<int, int> segment_of(double x, double half_budget);

/// Maximal intervals of constant clamped jump limits; their union is [0,1].
std::vector<SegmentSpec> partition_segments(double half_budget);

/// Builds the machine for worst-case regret at most desired_regret. Throws
/// InfeasibleError when the budget leaves a segment without room for a state.
Machine build_eedm(double desired_regret);

struct StateCountBounds {
  double lower = 0.0;
  double upper_raw = 0.0;  // asymptotic polynomial, inverts at large budgets
  double upper = 0.0;      // floored at `lower` where the polynomial inverts
};

/// Closed-form sandwich on the state count of build_eedm(desired_regret).
StateCountBounds eedm_state_count_bounds(double desired_regret);

/// Largest per-step quantization residue |x - S_i - 2 sqrt(R) jump| along the
/// run of s from `start`; stays within sqrt(R) by construction.
double max_quantization_residue(const Machine& m, double half_budget, const Sequence& s,
                                int start);

}  // namespace fsmregret
