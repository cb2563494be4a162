#pragma once

#include <cstdint>
#include <utility>

#include "fsmregret/machine.hpp"

namespace fsmregret {

// Enumeration limits for the exact worst-case search. Beyond these the caller
// is pointed at the scan/probe heuristics, which certify lower bounds only.
struct OracleCaps {
  int max_states = 12;
  int max_circle_len = 20;
  std::uint64_t max_corners = 1ull << 20;
  std::uint64_t max_circles = 2'000'000;
};

class OracleScaleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean square loss of `predictions` on s, in excess of the loss of the
/// sequence's own empirical mean.
double regret(const Sequence& s, const std::vector<double>& predictions);

/// (mean, population variance) of the samples.
std::pair<double, double> empirical_stats(const Sequence& s);

struct CircleStep {
  int jump = 0;
  double lo = 0.0;   // sample interval driving this step, clipped to the domain
  double hi = 0.0;
  bool hi_attained = false;  // false: hi is an open end, reachable only as a limit
};

// A cyclic state tour visiting no state twice, stored in canonical rotation
// (smallest state index first). steps[t] moves states[t] -> states[(t+1)%L].
struct MinimalCircle {
  std::vector<int> states;
  std::vector<CircleStep> steps;
  int length() const { return static_cast<int>(states.size()); }
};

struct RegretReport {
  double value = 0.0;
  std::vector<double> witness;  // one period of worst-case samples (limit values)
  bool attained = true;         // false when the maximum uses an open interval end
  std::vector<int> circle;      // state tour the witness rides
  bool exact = true;            // exact enumeration vs heuristic lower bound
  double xi = 0.0;              // inward nudge applied when the witness is simulated
};

struct CircleOccurrence {
  std::size_t start = 0;  // time step of the first sample in the occurrence
  std::vector<int> states;
  std::vector<double> samples;
};

// Greedy first-repeat extraction of circle occurrences from a trajectory.
// Extracted occurrences plus the residual samples partition the time steps;
// residual_states may carry one trailing state with no sample attached.
struct CircleDecomposition {
  std::vector<CircleOccurrence> occurrences;
  std::vector<int> residual_states;
  std::vector<double> residual_samples;
};

CircleDecomposition decompose_into_circles(const Trajectory& traj, const Sequence& s);

/// Every simple cycle of the jump graph, each annotated with its per-step
/// sample intervals. Throws OracleScaleError beyond the caps.
std::vector<MinimalCircle> enumerate_minimal_circles(const Machine& m, const OracleCaps& caps = {});

/// Exact maximum of the circle regret over all 2^L corner assignments of the
/// step intervals. The circle's own empirical mean is the reference.
RegretReport worst_regret_of_circle(const Machine& m, const MinimalCircle& c,
                                    const OracleCaps& caps = {});

/// Exact asymptotic worst-case regret: maximum over all minimal circles.
RegretReport max_regret(const Machine& m, const OracleCaps& caps = {});

struct TsRun {
  Sequence seq;             // emitted samples, `horizon` of them
  std::vector<int> states;  // horizon+1 visited states
  int cycle_start = -1;     // index into `states` where the eventual cycle begins
  std::vector<int> cycle;   // one period of the cycle, in visit order
};

/// Threshold-sequence adversary: emits hi whenever the current state value is
/// below x, else lo. The induced state walk is a deterministic self-map, so it
/// is eventually periodic; the first repeated state closes the cycle exactly.
TsRun threshold_sequence(const Machine& m, double x, int start, int horizon = -1);

/// Best circle regret over threshold-sequence cycles for x on a grid, all
/// start states sampled. A certified lower bound on max_regret.
RegretReport adversary_scan(const Machine& m, double grid);

/// Random-walk circle probing: extracts `probes` minimal circles from seeded
/// random walks and corner-maximizes each. Certified lower bound as well.
RegretReport probe_random_circles(const Machine& m, int probes, std::uint64_t seed);

/// Re-simulates a witness for `repetitions` periods, nudging samples that sit
/// on open interval ends inward by xi, and returns the measured regret.
double simulate_witness_regret(const Machine& m, const RegretReport& r, int repetitions,
                               double xi = 1e-9);

}  // namespace fsmregret
