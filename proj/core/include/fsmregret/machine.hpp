#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsmregret {

enum class Family { custom, dtm, edm, eedm };

std::string family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

/// Thrown by builders when the requested design point cannot be met.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-state transition table. Jump j, with -max_down <= j <= max_up, fires
// when the incoming sample lands in [cut(j-1), cut(j)). The topmost interval
// is closed at the machine's upper bound, so every sample in [lo, hi] maps to
// exactly one jump. Samples exactly on a cut belong to the higher interval.
struct StateTransitions {
  int max_down = 0;
  int max_up = 0;
  std::vector<double> cuts;  // max_down + max_up + 2 strictly increasing values

  double cut(int j) const { return cuts[static_cast<std::size_t>(j + max_down + 1)]; }
  int jump_count() const { return max_down + max_up + 1; }
};

// A deterministic finite-state predictor: strictly increasing state values,
// each carrying its own jump thresholds. Immutable in use; all operations on
// machines are pure functions.
struct Machine {
  Family family = Family::custom;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> states;
  std::vector<StateTransitions> transitions;

  int size() const { return static_cast<int>(states.size()); }
  double width() const { return hi - lo; }
};

struct Sequence {
  std::vector<double> samples;
  double lo = 0.0;
  double hi = 1.0;

  std::size_t size() const { return samples.size(); }
};

struct Trajectory {
  std::vector<int> states;        // n+1 entries: state before each sample, then the final state
  std::vector<double> predictions;  // n entries
  std::vector<double> losses;       // n entries, square loss per step
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks threshold monotonicity, [lo,hi] coverage, jump-target validity and
/// state-value ordering. A valid machine yields an empty report.
ValidationReport validate_machine(const Machine& m);

/// Throws std::invalid_argument carrying the full report when m is invalid.
void require_valid(const Machine& m);

/// Next state after consuming sample x in state `state`. Throws
/// std::domain_error when x lies outside [m.lo, m.hi].
int step(const Machine& m, int state, double x);

/// Runs the machine over s from `start`; the prediction at time t is the value
/// of the state occupied before consuming sample t.
Trajectory run(const Machine& m, const Sequence& s, int start);

/// Affine transplant of a machine onto [a, b]: values and cuts are mapped,
/// the jump structure is untouched.
Machine rescale_machine(const Machine& m, double a, double b);

/// Cumulative moving average predictions; prediction 1 is `init`.
std::vector<double> cma_predict(const Sequence& s, double init = 0.5);

/// Structural equality up to `tol`: same behaviour on every state, compared
/// through the nonempty jump intervals clipped to the sample domain.
bool machines_equal(const Machine& a, const Machine& b, double tol = 1e-9);

namespace detail {
// Unchecked step for hot loops; caller guarantees x in [lo, hi] and a valid machine.
int step_fast(const Machine& m, int state, double x);
}  // namespace detail

}  // namespace fsmregret
