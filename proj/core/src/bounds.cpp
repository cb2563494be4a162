#include "fsmregret/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fsmregret/dtm.hpp"
#include "fsmregret/oracle.hpp"

namespace fsmregret {

std::pair<int, int> min_jump_requirements(double state_value, double regret_bound) {
  if (!(regret_bound > 0))
    throw std::invalid_argument("min_jump_requirements: regret bound must be positive");
  const double sr = std::sqrt(regret_bound);
  const int mu = static_cast<int>(std::ceil((1.0 - state_value - sr) / (2.0 * sr)));
  const int md = static_cast<int>(std::ceil((state_value - sr) / (2.0 * sr)));
  return {std::max(mu, 0), std::max(md, 0)};
}

TsLocality ts_locality_check(const Machine& m, double regret_bound, double x) {
  const double radius = x <= 0.5 ? regret_bound / std::max(x, 1e-300)
                                 : regret_bound / std::max(1.0 - x, 1e-300);
  TsLocality out;
  out.fraction = 1.0;
  std::set<std::vector<int>> seen_cycles;
  for (int start = 0; start < m.size(); ++start) {
    TsRun ts = threshold_sequence(m, x, start);
    if (ts.cycle.empty()) continue;
    std::vector<int> key = ts.cycle;
    std::sort(key.begin(), key.end());
    if (!seen_cycles.insert(key).second) continue;
    int close = 0;
    for (int st : key)
      if (std::abs(m.states[static_cast<std::size_t>(st)] - x) <= radius) ++close;
    out.fraction = std::min(out.fraction,
                            static_cast<double>(close) / static_cast<double>(key.size()));
  }
  out.ok = out.fraction >= 0.5;
  return out;
}

double fsm_state_lower_bound(double regret_bound) {
  const double r = regret_bound;
  if (!(r > 0) || r >= 0.25)
    throw std::invalid_argument("fsm_state_lower_bound: needs regret in (0, 1/4)");
  const double r12 = std::sqrt(r);
  return (1.0 / 24.0) / (r * r12) - (7.0 / 16.0) / r + (7.0 / 12.0) / r12 + 2.0;
}

std::pair<double, double> comparison_ratios() {
  return {2.0 / 3.0, std::pow(2.0, 2.5)};
}

std::vector<BoundCurvePoint> bound_curve(double lo, double hi, int points) {
  if (points < 2 || !(lo > 0) || !(lo < hi))
    throw std::invalid_argument("bound_curve: bad grid");
  std::vector<BoundCurvePoint> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double r = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    BoundCurvePoint p;
    p.regret = r;
    p.dtm_feasible = dtm_feasibility(r).first;
    p.edm_states = std::pow(2.0 * r, -1.5);
    p.eedm = eedm_state_count_bounds(r);
    p.fsm_lower = r < 0.25 ? fsm_state_lower_bound(r) : 0.0;
    out.push_back(p);
  }
  return out;
}

}  // namespace fsmregret
