#pragma once

#include <utility>

#include "fsmregret/eedm.hpp"
#include "fsmregret/machine.hpp"

namespace fsmregret {

/// Minimum jump reach any machine with worst-case regret R must give a state
/// at `state_value` (both components clamped to >= 0).
std::pair<int, int> min_jump_requirements(double state_value, double regret_bound);

struct TsLocality {
  bool ok = false;
  double fraction = 0.0;  // share of cycle states within the locality radius
};

/// Threshold-sequence locality: every cycle the adversary settles into must
/// keep at least half its states within R/x of x (R/(1-x) above the midpoint).
/// Checked across all start states; `fraction` reports the worst cycle.
TsLocality ts_locality_check(const Machine& m, double regret_bound, double x);

/// Closed-form floor on the state count of any machine with worst-case
/// regret R.
double fsm_state_lower_bound(double regret_bound);

/// Asymptotic state-count ratios: segment-spaced vs uniform-grid machines, and
/// segment-spaced vs the universal floor.
std::pair<double, double> comparison_ratios();

struct BoundCurvePoint {
  double regret = 0.0;
  bool dtm_feasible = false;
  double edm_states = 0.0;  // (2R)^(-3/2), the uniform-grid budget
  StateCountBounds eedm;
  double fsm_lower = 0.0;
};

std::vector<BoundCurvePoint> bound_curve(double lo, double hi, int points);

}  // namespace fsmregret
