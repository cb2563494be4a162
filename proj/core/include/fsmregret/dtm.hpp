#pragma once

#include <optional>
#include <utility>

#include "fsmregret/machine.hpp"

namespace fsmregret {

// Tracking-memory machines: single-state down-jumps below the midpoint,
// single-state up-jumps above it, and cross-half traffic only through the two
// states nearest 1/2. The builder searches state placements top-down, halving
// the design by mirror symmetry.

enum class DtmParity { odd, even, auto_select };

struct DtmParams {
  double desired_regret = 0.1;
  DtmParity parity = DtmParity::auto_select;
  double scan_step = 1e-6;  // bisection tolerance of the state-value search
  double tol = 1e-12;
};

/// Value of the state nearest 1/2 for the requested parity. Throws
/// InfeasibleError when the even-parity formula lands above 1/2.
double starting_state(double desired_regret, DtmParity parity);

struct UpWindow {
  double lo = 0.0;
  double hi = 0.0;
};

/// Admissible range of the up-jump sample for one circle, given the samples
/// chosen for the down legs. `circle_states` are the values visited after the
/// up-jump, in visit order (descending); `down_samples` pairs with them.
/// Empty (nullopt) when no up-sample keeps the circle's regret in budget.
std::optional<UpWindow> up_sample_window(const std::vector<double>& circle_states,
                                         double state_value,
                                         const std::vector<double>& down_samples,
                                         double desired_regret);

/// Aggregated window for the j-step circle: the up-sample range that keeps the
/// regret in budget for every corner assignment of the down legs.
/// `states_above` holds the already-placed values nearest 1/2 first.
std::optional<UpWindow> circle_window(const std::vector<double>& states_above,
                                      double state_value, int circle_len,
                                      double desired_regret);

/// Brute-force variant of circle_window (enumerates all 2^(j-1) corner
/// assignments); reference implementation for tests.
std::optional<UpWindow> circle_window_bruteforce(const std::vector<double>& states_above,
                                                 double state_value, int circle_len,
                                                 double desired_regret);

/// Full cut list for a lower-half state (down cuts included) when a monotone
/// threshold assignment exists for the given maximum up-jump; nullopt when the
/// windows admit none.
std::optional<std::vector<double>> find_threshold_set(const std::vector<double>& states_above,
                                                      double state_value, int max_up,
                                                      double desired_regret);

/// Smallest value assignable to the next lower-half state with a valid
/// threshold set: coarse downward scan plus bisection refinement.
std::optional<std::pair<double, std::vector<double>>> min_state_value(
    const std::vector<double>& states_above, int max_up, double desired_regret,
    double scan_step = 1e-6);

/// Builds the smallest tracking-memory machine with worst-case regret at most
/// desired_regret. Throws InfeasibleError at or below the structural floor of
/// (1/6)^2.
Machine build_dtm(const DtmParams& params);

/// Whether a tracking-memory machine can reach the requested regret at all.
std::pair<bool, std::string> dtm_feasibility(double desired_regret);

}  // namespace fsmregret
