#include "fsmregret/edm.hpp"

#include <algorithm>
#include <cmath>

namespace fsmregret {

EdmParams edm_params(int k) {
  if (k < 9)
    throw InfeasibleError("edm: needs k >= 9, the state interval degenerates below that");
  EdmParams p;
  p.k = k;
  p.first_state = std::pow(static_cast<double>(k), -1.0 / 3.0);
  p.delta = (1.0 - 2.0 * p.first_state) / static_cast<double>(k - 1);
  p.weight = std::pow(static_cast<double>(k), -2.0 / 3.0);
  return p;
}

int edm_quantize(const EdmParams& p, double value) {
  const double raw = std::floor((value - p.first_state) / p.delta + 0.5);  // ties upward
  const long idx = static_cast<long>(raw);
  return static_cast<int>(std::clamp(idx, 0l, static_cast<long>(p.k - 1)));
}

int edm_update(const EdmParams& p, int state, double x) {
  const double value = p.first_state + static_cast<double>(state) * p.delta;
  return edm_quantize(p, value * (1.0 - p.weight) + x * p.weight);
}

Machine build_edm(int k) {
  const EdmParams p = edm_params(k);
  Machine m;
  m.family = Family::edm;
  m.states.resize(static_cast<std::size_t>(k));
  m.transitions.resize(static_cast<std::size_t>(k));
  const double band = p.delta / p.weight;  // sample width of one quantizer bin
  for (int i = 0; i < k; ++i) {
    const double s = p.first_state + static_cast<double>(i) * p.delta;
    m.states[static_cast<std::size_t>(i)] = s;
    // Jump j fires on x in [s + (j-1/2) band, s + (j+1/2) band); the edge
    // bins absorb everything beyond the grid ends.
    const int lo_j = -i;
    const int hi_j = k - 1 - i;
    int jmin = lo_j, jmax = hi_j;
    auto bin_lo = [&](int j) {
      return j == lo_j ? -std::numeric_limits<double>::infinity()
                       : s + (static_cast<double>(j) - 0.5) * band;
    };
    auto bin_hi = [&](int j) {
      return j == hi_j ? std::numeric_limits<double>::infinity()
                       : s + (static_cast<double>(j) + 0.5) * band;
    };
    while (jmin < jmax && bin_hi(jmin) <= 0.0) ++jmin;
    while (jmax > jmin && bin_lo(jmax) > 1.0) --jmax;
    std::vector<double> cuts;
    cuts.reserve(static_cast<std::size_t>(jmax - jmin) + 2);
    const double bot = bin_lo(jmin);
    const double top = bin_hi(jmax);
    cuts.push_back(std::isfinite(bot) ? std::min(bot, 0.0) : 0.0);
    for (int j = jmin; j < jmax; ++j) cuts.push_back(bin_hi(j));
    cuts.push_back(std::isfinite(top) ? std::max(top, 1.0) : 1.0);
    m.transitions[static_cast<std::size_t>(i)] = {-jmin, jmax, std::move(cuts)};
  }
  return m;
}

EdmAdversary edm_adversary(int k, double xi) {
  const EdmParams p = edm_params(k);
  EdmAdversary adv;
  adv.xi = xi;
  adv.m = static_cast<int>(std::floor(0.5 * p.weight / p.delta));
  const int m = adv.m;
  if (m < 2) throw InfeasibleError("edm adversary: grid too coarse, the circle needs m >= 2");

  const int start =
      edm_quantize(p, 0.5 - 0.5 * p.first_state - 0.5 * p.weight + p.delta);
  const int top = start + 2 * m - 2;
  if (top > k - 1)
    throw InfeasibleError("edm adversary: circle of 2m-1 states does not fit the grid");

  const double band = p.delta / p.weight;
  auto value_of = [&](int idx) { return p.first_state + static_cast<double>(idx) * p.delta; };

  // State tour: odd times walk the lower rung upward, even times sit on the
  // upper rung m states higher.
  const int period = 2 * m - 1;
  adv.circle.reserve(static_cast<std::size_t>(period));
  adv.samples_limit.reserve(static_cast<std::size_t>(period));
  for (int t = 1; t <= period; ++t) {
    int idx;
    if (t % 2 == 1) {
      idx = start + (t - 1) / 2;
      adv.circle.push_back(idx);
      adv.samples_limit.push_back(value_of(idx) +
                                  (static_cast<double>(m) + 0.5) * band);
    } else {
      idx = start + (t / 2 - 1) + m;
      adv.circle.push_back(idx);
      adv.samples_limit.push_back(value_of(idx) -
                                  (static_cast<double>(m) - 1.5) * band);
    }
  }
  // The final step drops m-1 states from the last lower-rung state.
  adv.samples_limit.back() =
      value_of(adv.circle.back()) - (static_cast<double>(m) - 1.5) * band;

  adv.samples = adv.samples_limit;
  for (double& x : adv.samples) x -= xi;

  for (double x : adv.samples_limit)
    if (x < 0.0 || x > 1.0)
      throw InfeasibleError("edm adversary: a circle sample leaves [0,1] at this k");

  const double k23 = 1.0 / p.weight;  // k^(2/3)
  const double k43 = k23 * k23;       // k^(4/3)
  const double mm = static_cast<double>(m) * (m - 1);
  adv.predicted_regret =
      p.delta * p.delta * (0.25 * k43 + mm * k23 - mm / 3.0);
  return adv;
}

std::pair<double, double> edm_bounds(int k) {
  const EdmParams p = edm_params(k);
  return {0.5 * p.weight, 4.25 * p.weight};
}

}  // namespace fsmregret
