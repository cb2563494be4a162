#include "fsmregret/machine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace fsmregret {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::dtm: return "dtm";
    case Family::edm: return "edm";
    case Family::eedm: return "eedm";
    default: return "custom";
  }
}

std::optional<Family> family_from_name(const std::string& name) {
  if (name == "custom") return Family::custom;
  if (name == "dtm") return Family::dtm;
  if (name == "edm") return Family::edm;
  if (name == "eedm") return Family::eedm;
  return std::nullopt;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i];
  }
  return os.str();
}

ValidationReport validate_machine(const Machine& m) {
  ValidationReport rep;
  const int k = m.size();
  if (k == 0) {
    rep.violations.push_back("machine has no states");
    return rep;
  }
  if (!(m.lo < m.hi)) rep.violations.push_back("bounds lo >= hi");
  if (static_cast<int>(m.transitions.size()) != k) {
    rep.violations.push_back("transition table size differs from state count");
    return rep;
  }
  for (int i = 0; i < k; ++i) {
    if (m.states[i] < m.lo || m.states[i] > m.hi)
      rep.violations.push_back("state " + std::to_string(i) + ": value " + fmt(m.states[i]) +
                               " outside [" + fmt(m.lo) + "," + fmt(m.hi) + "]");
    if (i > 0 && !(m.states[i - 1] < m.states[i]))
      rep.violations.push_back("state values not strictly increasing at index " +
                               std::to_string(i));
  }
  for (int i = 0; i < k; ++i) {
    const auto& t = m.transitions[i];
    const std::string tag = "state " + std::to_string(i);
    if (t.max_down < 0 || t.max_up < 0) {
      rep.violations.push_back(tag + ": negative jump bound");
      continue;
    }
    if (static_cast<int>(t.cuts.size()) != t.max_down + t.max_up + 2) {
      rep.violations.push_back(tag + ": threshold list has " + std::to_string(t.cuts.size()) +
                               " entries, expected " + std::to_string(t.max_down + t.max_up + 2));
      continue;
    }
    bool mono = true;
    for (std::size_t p = 1; p < t.cuts.size(); ++p) {
      if (!(t.cuts[p - 1] < t.cuts[p])) {
        rep.violations.push_back(tag + ": thresholds not strictly increasing (" +
                                 fmt(t.cuts[p - 1]) + " >= " + fmt(t.cuts[p]) + ")");
        mono = false;
        break;
      }
    }
    if (!mono) continue;
    if (t.cuts.front() > m.lo)
      rep.violations.push_back(tag + ": interval [" + fmt(m.lo) + "," + fmt(t.cuts.front()) +
                               ") unmapped");
    if (t.cuts.back() < m.hi)
      rep.violations.push_back(tag + ": interval (" + fmt(t.cuts.back()) + "," + fmt(m.hi) +
                               "] unmapped");
    for (int j = -t.max_down; j <= t.max_up; ++j) {
      const double a = std::max(t.cut(j - 1), m.lo);
      const double b = std::min(t.cut(j), m.hi);
      const bool closed_top = t.cut(j) >= m.hi;  // topmost usable interval reaches hi
      const bool nonempty = closed_top ? (a <= m.hi && a <= b) : (a < b);
      if (!nonempty) continue;
      const int target = i + j;
      if (target < 0 || target >= k)
        rep.violations.push_back(tag + ": jump " + std::to_string(j) +
                                 " lands outside the state array");
    }
  }
  return rep;
}

void require_valid(const Machine& m) {
  ValidationReport rep = validate_machine(m);
  if (!rep.ok()) throw std::invalid_argument("invalid machine: " + rep.to_string());
}

namespace detail {

int step_fast(const Machine& m, int state, double x) {
  const auto& t = m.transitions[static_cast<std::size_t>(state)];
  auto it = std::upper_bound(t.cuts.begin(), t.cuts.end(), x);
  int j;
  if (it == t.cuts.begin()) {
    j = -t.max_down;  // numeric dust below the lowest cut
  } else if (it == t.cuts.end()) {
    j = t.max_up;  // x == hi with the top interval closed
  } else {
    j = static_cast<int>(it - t.cuts.begin()) - t.max_down - 1;
  }
  return state + j;
}

}  // namespace detail

int step(const Machine& m, int state, double x) {
  if (state < 0 || state >= m.size()) throw std::out_of_range("step: state index out of range");
  if (!(x >= m.lo && x <= m.hi))
    throw std::domain_error("step: sample " + fmt(x) + " outside [" + fmt(m.lo) + "," +
                            fmt(m.hi) + "]");
  int next = detail::step_fast(m, state, x);
  if (next < 0 || next >= m.size())
    throw std::logic_error("step: transition leaves the state array (invalid machine)");
  return next;
}

Trajectory run(const Machine& m, const Sequence& s, int start) {
  if (start < 0 || start >= m.size()) throw std::out_of_range("run: invalid start state");
  for (std::size_t t = 0; t < s.samples.size(); ++t) {
    const double x = s.samples[t];
    if (!(x >= m.lo && x <= m.hi))
      throw std::domain_error("run: sample at line " + std::to_string(t + 1) + " (" + fmt(x) +
                              ") outside [" + fmt(m.lo) + "," + fmt(m.hi) + "]");
  }
  Trajectory traj;
  const std::size_t n = s.samples.size();
  traj.states.reserve(n + 1);
  traj.predictions.reserve(n);
  traj.losses.reserve(n);
  int cur = start;
  traj.states.push_back(cur);
  for (std::size_t t = 0; t < n; ++t) {
    const double pred = m.states[static_cast<std::size_t>(cur)];
    const double d = s.samples[t] - pred;
    traj.predictions.push_back(pred);
    traj.losses.push_back(d * d);
    cur = detail::step_fast(m, cur, s.samples[t]);
    traj.states.push_back(cur);
  }
  return traj;
}

Machine rescale_machine(const Machine& m, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("rescale_machine: requires a < b");
  const double scale = (b - a) / m.width();
  auto map = [&](double v) { return a + (v - m.lo) * scale; };
  Machine out = m;
  out.lo = a;
  out.hi = b;
  for (auto& v : out.states) v = map(v);
  for (auto& t : out.transitions)
    for (auto& c : t.cuts) c = map(c);
  return out;
}

std::vector<double> cma_predict(const Sequence& s, double init) {
  std::vector<double> preds;
  preds.reserve(s.samples.size());
  double pred = init;
  for (std::size_t t = 0; t < s.samples.size(); ++t) {
    preds.push_back(pred);
    const double w = 1.0 / static_cast<double>(t + 2);
    pred = (1.0 - w) * pred + w * s.samples[t];
  }
  return preds;
}

namespace {

struct Interval {
  int jump;
  double lo, hi;
};

// Nonempty jump intervals clipped to the sample domain, for behavioural comparison.
std::vector<Interval> clipped_intervals(const Machine& m, int i) {
  std::vector<Interval> out;
  const auto& t = m.transitions[static_cast<std::size_t>(i)];
  for (int j = -t.max_down; j <= t.max_up; ++j) {
    double a = std::max(t.cut(j - 1), m.lo);
    double b = std::min(t.cut(j), m.hi);
    const bool closed_top = t.cut(j) >= m.hi;
    if (closed_top ? (a <= b) : (a < b)) out.push_back({j, a, b});
  }
  return out;
}

}  // namespace

bool machines_equal(const Machine& a, const Machine& b, double tol) {
  if (a.size() != b.size()) return false;
  if (std::abs(a.lo - b.lo) > tol || std::abs(a.hi - b.hi) > tol) return false;
  for (int i = 0; i < a.size(); ++i)
    if (std::abs(a.states[i] - b.states[i]) > tol) return false;
  for (int i = 0; i < a.size(); ++i) {
    auto ia = clipped_intervals(a, i);
    auto ib = clipped_intervals(b, i);
    if (ia.size() != ib.size()) return false;
    for (std::size_t p = 0; p < ia.size(); ++p) {
      if (ia[p].jump != ib[p].jump) return false;
      if (std::abs(ia[p].lo - ib[p].lo) > tol) return false;
      if (std::abs(ia[p].hi - ib[p].hi) > tol) return false;
    }
  }
  return true;
}

}  // namespace fsmregret
