#include "fsmregret/eedm.hpp"

#include <algorithm>
#include <cmath>

namespace fsmregret {

namespace {
constexpr double kTiny = 1e-12;
}

double SegmentSpec::delta(double half_budget) const {
  return std::sqrt(half_budget) / (2.0 * max_up * max_down);
}

std::pair<int, int> segment_of(double x, double half_budget) {
  if (!(half_budget > 0)) throw std::invalid_argument("segment_of: budget must be positive");
  const double sr = std::sqrt(half_budget);
  const int mu = static_cast<int>(std::ceil((1.0 - x - sr) / (2.0 * sr)));
  const int md = static_cast<int>(std::ceil((x - sr) / (2.0 * sr)));
  return {std::max(mu, 1), std::max(md, 1)};
}

std::vector<SegmentSpec> partition_segments(double half_budget) {
  const double sr = std::sqrt(half_budget);
  if (!(half_budget > 0) || !(sr < 0.5))
    throw InfeasibleError("partition_segments: budget degenerate, needs sqrt(R) < 1/2");
  std::vector<double> cutpoints{0.0, 1.0};
  for (int j = 0;; ++j) {
    const double b = (2.0 * j + 1.0) * sr;
    if (b >= 1.0 - kTiny) break;
    if (b > kTiny) {
      cutpoints.push_back(b);
      cutpoints.push_back(1.0 - b);
    }
  }
  std::sort(cutpoints.begin(), cutpoints.end());
  cutpoints.erase(std::unique(cutpoints.begin(), cutpoints.end(),
                              [](double a, double b) { return std::abs(a - b) < kTiny; }),
                  cutpoints.end());

  std::vector<SegmentSpec> segs;
  for (std::size_t p = 0; p + 1 < cutpoints.size(); ++p) {
    const double lo = cutpoints[p];
    const double hi = cutpoints[p + 1];
    auto [mu, md] = segment_of(0.5 * (lo + hi), half_budget);
    if (!segs.empty() && segs.back().max_up == mu && segs.back().max_down == md) {
      segs.back().hi = hi;  // the clamp merged two raw intervals
    } else {
      segs.push_back({lo, hi, mu, md});
    }
  }
  return segs;
}

namespace {

std::vector<double> lay_states(const std::vector<SegmentSpec>& segs, double half_budget) {
  std::vector<double> states;
  for (const auto& seg : segs) {
    const double d = seg.delta(half_budget);
    for (double v = seg.lo; v < seg.hi - kTiny; v += d) states.push_back(v);
  }
  return states;
}

void refine_boundaries(std::vector<double>& states, const std::vector<SegmentSpec>& segs,
                       double half_budget) {
  auto erase_range = [&](double lo, double hi) {
    states.erase(std::remove_if(states.begin(), states.end(),
                                [&](double v) { return v >= lo - kTiny && v < hi - kTiny; }),
                 states.end());
  };
  for (std::size_t s = 0; s + 1 < segs.size(); ++s) {
    const double dl = segs[s].delta(half_budget);
    const double dr = segs[s + 1].delta(half_budget);
    const double b = segs[s].hi;
    if (dr < dl - kTiny) {
      // Finer segment above: re-grid the top of the coarse one at the fine
      // gap, anchored at the shared boundary.
      const int zone = segs[s].max_up + segs[s].max_down;
      const double zone_lo = std::max(b - zone * dr, segs[s].lo);
      erase_range(zone_lo, b);
      for (int p = 1; p <= zone; ++p) {
        const double v = b - p * dr;
        if (v > segs[s].lo - kTiny) states.push_back(v);
      }
    } else if (dl < dr - kTiny) {
      // Finer segment below: re-grid the bottom of the coarse one. The erase
      // window stops at the zone top so the surviving lattice resumes within
      // one coarse gap of it.
      const int zone = segs[s + 1].max_up + segs[s + 1].max_down;
      const double zone_top = std::min(b + (zone - 1) * dl, segs[s + 1].hi - dl);
      erase_range(b, zone_top + 2 * kTiny);
      for (int p = 0; p < zone; ++p) {
        const double v = b + p * dl;
        if (v < segs[s + 1].hi - kTiny) states.push_back(v);
      }
    }
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end(),
                           [](double a, double b) { return std::abs(a - b) < kTiny; }),
               states.end());
}

}  // namespace

Machine build_eedm(double desired_regret) {
  if (!(desired_regret > 0)) throw InfeasibleError("build_eedm: regret budget must be positive");
  const double half = desired_regret / 2.0;
  const double sr = std::sqrt(half);
  const auto segs = partition_segments(half);
  std::vector<double> states = lay_states(segs, half);
  refine_boundaries(states, segs, half);
  const int k = static_cast<int>(states.size());
  if (k < 2) throw InfeasibleError("build_eedm: budget leaves no usable grid");

  Machine m;
  m.family = Family::eedm;
  m.states = states;
  m.transitions.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double s = states[static_cast<std::size_t>(i)];
    auto [mu, md] = segment_of(s, half);
    int jmin = -md, jmax = mu;
    auto lo_of = [&](int j) { return s + (2.0 * j - 1.0) * sr; };
    auto hi_of = [&](int j) { return s + (2.0 * j + 1.0) * sr; };
    while (jmin < jmax && hi_of(jmin) <= 0.0) ++jmin;
    while (jmax > jmin && lo_of(jmax) > 1.0) --jmax;
    if (i + jmin < 0 || i + jmax >= k)
      throw std::logic_error("build_eedm: jump range leaves the state array");
    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(jmax - jmin) + 2);
    cuts.push_back(std::min(lo_of(jmin), 0.0));
    for (int j = jmin; j < jmax; ++j) cuts.push_back(hi_of(j));
    cuts.push_back(std::max(hi_of(jmax), 1.0));
    m.transitions[static_cast<std::size_t>(i)] = {-jmin, jmax, std::move(cuts)};
  }
  require_valid(m);
  return m;
}

StateCountBounds eedm_state_count_bounds(double desired_regret) {
  const double r = desired_regret / 2.0;
  StateCountBounds b;
  const double r12 = std::sqrt(r);
  b.lower = (1.0 / 12.0) * (1.0 / (r * r12) - 15.0 / r + 2.0 / r12);
  b.upper_raw = (1.0 / 12.0) / (r * r12) - (5.0 / 12.0) / r - 12.0 / r12 - 32.0;
  b.upper = std::max(b.upper_raw, b.lower);
  return b;
}

double max_quantization_residue(const Machine& m, double half_budget, const Sequence& s,
                                int start) {
  const double sr = std::sqrt(half_budget);
  Trajectory traj = run(m, s, start);
  double worst = 0.0;
  for (std::size_t t = 0; t < s.samples.size(); ++t) {
    const int jump = traj.states[t + 1] - traj.states[t];
    const double resid =
        s.samples[t] - m.states[static_cast<std::size_t>(traj.states[t])] - 2.0 * sr * jump;
    worst = std::max(worst, std::abs(resid));
  }
  return worst;
}

}  // namespace fsmregret
