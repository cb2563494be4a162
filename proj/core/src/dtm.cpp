#include "fsmregret/dtm.hpp"

#include <algorithm>
#include <cmath>

#include "fsmregret/oracle.hpp"

namespace fsmregret {

namespace {

constexpr double kCutGap = 1e-9;       // minimum spacing between emitted cuts
constexpr double kEmptyDown = 1e-9;    // below this the down interval is treated as empty
constexpr double kCheckTol = 1e-12;

double midpoint(double a, double b) { return 0.5 * (a + b); }

}  // namespace

std::pair<bool, std::string> dtm_feasibility(double desired_regret) {
  if (!(desired_regret > 0)) return {false, "regret budget must be positive"};
  const double floor = 1.0 / 36.0;
  if (desired_regret > floor) return {true, "above the (1/6)^2 = 0.0278 floor"};
  return {false,
          "tracking-memory machines cannot reach regret at or below (1/6)^2 = 0.0278; "
          "single-state down-jumps in the lower half force this floor"};
}

double starting_state(double desired_regret, DtmParity parity) {
  if (!(desired_regret > 0)) throw std::invalid_argument("starting_state: regret must be > 0");
  if (parity == DtmParity::auto_select)
    throw std::invalid_argument("starting_state: pick a parity");
  if (parity == DtmParity::odd) return 0.5;
  const double r = desired_regret;
  const double s = std::max(1.0 - std::sqrt(r + 0.25),
                            2.0 + std::sqrt(r) - 2.0 * std::sqrt(r + std::sqrt(r) + 0.5));
  if (s >= 0.5 - 1e-15)
    throw InfeasibleError(
        "starting_state: even-parity value lands at or above 1/2; the regret budget is below "
        "the (1/6)^2 = 0.0278 floor");
  return s;
}

std::optional<UpWindow> up_sample_window(const std::vector<double>& circle_states,
                                         double state_value,
                                         const std::vector<double>& down_samples,
                                         double desired_regret) {
  if (circle_states.size() != down_samples.size())
    throw std::invalid_argument("up_sample_window: state/sample lists differ in length");
  const std::size_t legs = circle_states.size();
  const int j = static_cast<int>(legs) + 1;
  double a = state_value;
  double g = 0.0;
  for (std::size_t t = 0; t < legs; ++t) {
    a += state_value - down_samples[t];
    g += (circle_states[t] - state_value) *
         (circle_states[t] + state_value - 2.0 * down_samples[t]);
  }
  const double rad = desired_regret - g / static_cast<double>(j);
  if (rad < 0) return std::nullopt;
  const double b = static_cast<double>(j) * std::sqrt(rad);
  return UpWindow{a - b, a + b};
}

namespace {

// Candidate corner patterns for the window extremes. The window bounds are
// convex/concave in the pairwise sums (A, G) of the per-leg choice terms, so
// the extremes sit on vertices of the choice zonotope; those are exactly the
// patterns cut out by a rotating half-plane over the choice vectors.
struct ChoiceTerms {
  double a0, a1;  // contribution to A
  double g0, g1;  // contribution to G
};

std::optional<UpWindow> window_from_patterns(const std::vector<ChoiceTerms>& terms,
                                             double state_value, int j, double desired_regret,
                                             const std::vector<std::vector<char>>& patterns) {
  double c_l = -std::numeric_limits<double>::infinity();
  double c_h = std::numeric_limits<double>::infinity();
  const std::size_t legs = terms.size();
  for (const auto& pat : patterns) {
    double A = 0.0, G = 0.0;
    for (std::size_t t = 0; t < legs; ++t) {
      A += pat[t] ? terms[t].a1 : terms[t].a0;
      G += pat[t] ? terms[t].g1 : terms[t].g0;
    }
    const double rad = desired_regret - G / static_cast<double>(j);
    if (rad < 0) return std::nullopt;  // this corner admits no up sample at all
    const double a = state_value + A;
    const double b = static_cast<double>(j) * std::sqrt(rad);
    c_l = std::max(c_l, a - b);
    c_h = std::min(c_h, a + b);
  }
  return UpWindow{c_l, c_h};
}

std::vector<double> circle_path(const std::vector<double>& states_above, int circle_len) {
  // Values visited after the up-jump, highest first.
  const std::size_t legs = static_cast<std::size_t>(circle_len) - 1;
  return {states_above.end() - static_cast<std::ptrdiff_t>(legs), states_above.end()};
}

std::vector<ChoiceTerms> choice_terms(const std::vector<double>& path, double s_i,
                                      double sqrt_r) {
  std::vector<ChoiceTerms> terms;
  terms.reserve(path.size());
  for (double v : path) {
    ChoiceTerms c;
    c.a0 = s_i;                    // down sample 0
    c.g0 = (v - s_i) * (v + s_i);
    c.a1 = s_i - v + sqrt_r;       // down sample v - sqrt(R)
    c.g1 = (v - s_i) * (s_i - v + 2.0 * sqrt_r);
    terms.push_back(c);
  }
  return terms;
}

}  // namespace

std::optional<UpWindow> circle_window(const std::vector<double>& states_above,
                                      double state_value, int circle_len,
                                      double desired_regret) {
  if (circle_len < 2) throw std::invalid_argument("circle_window: circle needs >= 2 steps");
  if (static_cast<std::size_t>(circle_len - 1) > states_above.size())
    throw std::invalid_argument("circle_window: not enough states above");
  const double sqrt_r = std::sqrt(desired_regret);
  const auto path = circle_path(states_above, circle_len);
  const auto terms = choice_terms(path, state_value, sqrt_r);
  const std::size_t legs = terms.size();

  std::vector<std::vector<char>> patterns;
  patterns.emplace_back(legs, char(0));
  patterns.emplace_back(legs, char(1));
  {  // pattern maximizing G: the binding corner of the radicand check
    std::vector<char> pat(legs);
    for (std::size_t t = 0; t < legs; ++t) pat[t] = terms[t].g1 > terms[t].g0 ? 1 : 0;
    patterns.push_back(std::move(pat));
  }
  std::vector<std::pair<double, double>> dirs(legs);
  for (std::size_t t = 0; t < legs; ++t)
    dirs[t] = {terms[t].a1 - terms[t].a0, terms[t].g1 - terms[t].g0};
  for (std::size_t r = 0; r < legs; ++r) {
    const double theta = std::atan2(dirs[r].second, dirs[r].first);
    for (int side : {0, 1}) {
      const double phi = theta + (side ? 0.5 : -0.5) * M_PI;
      const double ux = std::cos(phi), uy = std::sin(phi);
      std::vector<char> pat(legs);
      for (std::size_t t = 0; t < legs; ++t)
        pat[t] = (dirs[t].first * ux + dirs[t].second * uy) > 0 ? 1 : 0;
      patterns.push_back(std::move(pat));
    }
  }
  return window_from_patterns(terms, state_value, circle_len, desired_regret, patterns);
}

std::optional<UpWindow> circle_window_bruteforce(const std::vector<double>& states_above,
                                                 double state_value, int circle_len,
                                                 double desired_regret) {
  if (circle_len < 2) throw std::invalid_argument("circle_window: circle needs >= 2 steps");
  const double sqrt_r = std::sqrt(desired_regret);
  const auto path = circle_path(states_above, circle_len);
  const std::size_t legs = path.size();
  if (legs > 24) throw std::invalid_argument("circle_window_bruteforce: too many legs");
  double c_l = -std::numeric_limits<double>::infinity();
  double c_h = std::numeric_limits<double>::infinity();
  std::vector<double> downs(legs);
  for (std::uint64_t mask = 0; mask < (1ull << legs); ++mask) {
    for (std::size_t t = 0; t < legs; ++t)
      downs[t] = (mask >> t) & 1u ? path[t] - sqrt_r : 0.0;
    auto w = up_sample_window(path, state_value, downs, desired_regret);
    if (!w) return std::nullopt;
    c_l = std::max(c_l, w->lo);
    c_h = std::min(c_h, w->hi);
  }
  return UpWindow{c_l, c_h};
}

std::optional<std::vector<double>> find_threshold_set(const std::vector<double>& states_above,
                                                      double state_value, int max_up,
                                                      double desired_regret) {
  const int i_minus_1 = static_cast<int>(states_above.size());
  if (max_up < 1 || max_up > i_minus_1)
    throw std::invalid_argument("find_threshold_set: max_up must lie in [1, states above]");
  const double sqrt_r = std::sqrt(desired_regret);

  std::vector<UpWindow> win(static_cast<std::size_t>(max_up) + 1);  // win[j-1] for circle j
  for (int j = 2; j <= max_up + 1; ++j) {
    auto w = circle_window(states_above, state_value, j, desired_regret);
    if (!w) return std::nullopt;
    win[static_cast<std::size_t>(j - 1)] = *w;
  }
  for (int j = 2; j <= max_up; ++j) {
    if (!(win[static_cast<std::size_t>(j - 1)].lo < win[static_cast<std::size_t>(j - 1)].hi))
      return std::nullopt;
    if (win[static_cast<std::size_t>(j)].lo > win[static_cast<std::size_t>(j - 1)].hi + kCheckTol)
      return std::nullopt;
  }
  if (win[1].lo > state_value + sqrt_r + kCheckTol) return std::nullopt;
  if (win[static_cast<std::size_t>(max_up)].hi < 1.0 - kCheckTol) return std::nullopt;

  // Cut p carries the boundary between up-jumps p and p+1; the top cut is
  // pinned at 1 (the closed-top convention covers the last interval).
  const int m = max_up;
  std::vector<double> lo_req(static_cast<std::size_t>(m) + 1);
  std::vector<double> hi_req(static_cast<std::size_t>(m) + 1);
  lo_req[0] = win[1].lo;
  hi_req[0] = state_value + sqrt_r;
  for (int p = 1; p < m; ++p) {
    lo_req[static_cast<std::size_t>(p)] = win[static_cast<std::size_t>(p + 1)].lo;
    hi_req[static_cast<std::size_t>(p)] = win[static_cast<std::size_t>(p)].hi;
  }
  lo_req[static_cast<std::size_t>(m)] = 1.0;
  hi_req[static_cast<std::size_t>(m)] = 1.0;  // pinned

  std::vector<double> ub(static_cast<std::size_t>(m) + 1);
  ub[static_cast<std::size_t>(m)] = 1.0;
  for (int p = m - 1; p >= 0; --p)
    ub[static_cast<std::size_t>(p)] =
        std::min(hi_req[static_cast<std::size_t>(p)], ub[static_cast<std::size_t>(p + 1)] - kCutGap);

  std::vector<double> cuts;
  const bool has_down = state_value - sqrt_r > kEmptyDown;
  if (has_down) {
    cuts.push_back(0.0);
    cuts.push_back(state_value - sqrt_r);
  } else {
    cuts.push_back(std::min(state_value - sqrt_r, 0.0));
  }
  double prev = state_value - sqrt_r;

  // Widest stay region: the stay/up cut sits at its upper admissible end.
  {
    const double lb = std::max(lo_req[0], prev + kCutGap);
    if (lb > ub[0] + kCheckTol) return std::nullopt;
    const double t0 = std::clamp(std::min(state_value + sqrt_r, ub[0]), lb, ub[0]);
    cuts.push_back(t0);
    prev = t0;
  }
  for (int p = 1; p < m; ++p) {
    const double lb = std::max(lo_req[static_cast<std::size_t>(p)], prev + kCutGap);
    if (lb > ub[static_cast<std::size_t>(p)] + kCheckTol) return std::nullopt;
    const double t = std::clamp(midpoint(lo_req[static_cast<std::size_t>(p)],
                                         win[static_cast<std::size_t>(p)].hi),
                                lb, ub[static_cast<std::size_t>(p)]);
    cuts.push_back(t);
    prev = t;
  }
  if (prev >= 1.0 - kCutGap) return std::nullopt;
  cuts.push_back(1.0);
  return cuts;
}

std::optional<std::pair<double, std::vector<double>>> min_state_value(
    const std::vector<double>& states_above, int max_up, double desired_regret,
    double scan_step) {
  const double upper = states_above.back();
  auto feasible = [&](double s) {
    return s > 0 && find_threshold_set(states_above, s, max_up, desired_regret).has_value();
  };

  const double coarse = std::max(scan_step, 1e-3);
  double lowest = std::numeric_limits<double>::quiet_NaN();
  for (double s = upper - coarse; s > coarse * 0.5; s -= coarse)
    if (feasible(s)) lowest = s;
  if (std::isnan(lowest)) {
    // The feasible band can be narrower than the coarse lattice near the
    // structural floor; probe the strip just below the previous state.
    const double fine = coarse / 16.0;
    for (double s = upper - fine; s > upper - coarse; s -= fine)
      if (feasible(s)) lowest = s;
    if (std::isnan(lowest)) return std::nullopt;
  }

  double lo = std::max(lowest - coarse, 0.0);
  double hi = lowest;
  if (!feasible(lo)) {
    while (hi - lo > scan_step) {
      const double mid = midpoint(lo, hi);
      if (feasible(mid))
        hi = mid;
      else
        lo = mid;
    }
  } else {
    hi = lo;  // coarse floor already feasible; the lattice scan bottomed out
  }
  auto cuts = find_threshold_set(states_above, hi, max_up, desired_regret);
  if (!cuts) return std::nullopt;
  return std::make_pair(hi, std::move(*cuts));
}

namespace {

struct LowerState {
  double value;
  int max_up;
  std::vector<double> cuts;  // full cut list, down cuts included
};

std::optional<std::vector<LowerState>> build_lower_half(double r_d, DtmParity parity,
                                                        double scan_step) {
  const double sqrt_r = std::sqrt(r_d);
  double s1;
  try {
    s1 = parity == DtmParity::odd ? 0.5 : starting_state(r_d, DtmParity::even);
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
  std::vector<LowerState> lower;
  {
    LowerState st;
    st.value = s1;
    const bool has_up = s1 + sqrt_r < 1.0 - 1e-12;
    const bool has_down = s1 - sqrt_r > kEmptyDown;
    st.max_up = has_up ? 1 : 0;
    if (has_down) {
      st.cuts = {0.0, s1 - sqrt_r};
    } else {
      st.cuts = {std::min(s1 - sqrt_r, 0.0)};
    }
    st.cuts.push_back(s1 + sqrt_r);
    if (has_up) st.cuts.push_back(1.0);
    lower.push_back(std::move(st));
  }

  std::vector<double> values{s1};  // descending
  while (values.back() > sqrt_r + 1e-12) {
    const int i = static_cast<int>(values.size()) + 1;
    std::optional<std::pair<double, std::vector<double>>> best;
    int best_m = 0;
    for (int m = 1; m <= i - 1; ++m) {
      auto r = min_state_value(values, m, r_d, scan_step);
      if (r && (!best || r->first < best->first - 1e-12)) {
        best = std::move(r);
        best_m = m;
      }
    }
    if (!best) return std::nullopt;
    LowerState st;
    st.value = best->first;
    st.max_up = best_m;
    st.cuts = std::move(best->second);
    values.push_back(st.value);
    lower.push_back(std::move(st));
    if (values.size() > 400)
      throw std::logic_error("build_dtm: state placement failed to terminate");
  }
  return lower;
}

Machine assemble(const std::vector<LowerState>& lower, DtmParity parity) {
  const int kl = static_cast<int>(lower.size());
  const int mirrored = parity == DtmParity::odd ? kl - 1 : kl;
  const int k = kl + mirrored;

  Machine m;
  m.family = Family::dtm;
  m.states.resize(static_cast<std::size_t>(k));
  m.transitions.resize(static_cast<std::size_t>(k));

  for (int i = 1; i <= kl; ++i) {
    const LowerState& st = lower[static_cast<std::size_t>(i - 1)];
    const int pos = kl - i;
    std::vector<double> cuts = st.cuts;
    const int max_up = st.max_up;
    const int max_down = static_cast<int>(cuts.size()) - max_up - 2;
    m.states[static_cast<std::size_t>(pos)] = st.value;
    m.transitions[static_cast<std::size_t>(pos)] = {max_down, max_up, std::move(cuts)};
  }
  for (int i = parity == DtmParity::odd ? 2 : 1; i <= kl; ++i) {
    const int pos = kl + i - 1 - (parity == DtmParity::odd ? 1 : 0);
    const int src = kl - i;
    const auto& t = m.transitions[static_cast<std::size_t>(src)];
    std::vector<double> cuts(t.cuts.size());
    for (std::size_t p = 0; p < t.cuts.size(); ++p)
      cuts[p] = 1.0 - t.cuts[t.cuts.size() - 1 - p];
    m.states[static_cast<std::size_t>(pos)] = 1.0 - m.states[static_cast<std::size_t>(src)];
    m.transitions[static_cast<std::size_t>(pos)] = {t.max_up, t.max_down, std::move(cuts)};
  }
  return m;
}

}  // namespace

Machine build_dtm(const DtmParams& params) {
  const double r_d = params.desired_regret;
  auto [ok, why] = dtm_feasibility(r_d);
  if (!ok) throw InfeasibleError("build_dtm: " + why);

  std::optional<Machine> odd, even;
  if (params.parity != DtmParity::even) {
    if (auto lower = build_lower_half(r_d, DtmParity::odd, params.scan_step))
      odd = assemble(*lower, DtmParity::odd);
  }
  if (params.parity != DtmParity::odd) {
    if (auto lower = build_lower_half(r_d, DtmParity::even, params.scan_step))
      even = assemble(*lower, DtmParity::even);
  }

  std::optional<Machine> pick;
  if (odd && even)
    pick = odd->size() <= even->size() ? std::move(odd) : std::move(even);
  else if (odd)
    pick = std::move(odd);
  else if (even)
    pick = std::move(even);
  if (!pick)
    throw InfeasibleError("build_dtm: no parity admits a valid construction at this budget");

  require_valid(*pick);
  OracleCaps caps;
  if (pick->size() <= caps.max_states) {
    const double certified = max_regret(*pick, caps).value;
    if (certified > r_d + 1e-9)
      throw std::logic_error("build_dtm: constructed machine exceeds its regret budget");
  } else {
    const double probed = adversary_scan(*pick, 1e-3).value;
    if (probed > r_d + 1e-9)
      throw std::logic_error("build_dtm: constructed machine exceeds its regret budget");
  }
  return std::move(*pick);
}

}  // namespace fsmregret
