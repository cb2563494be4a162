#include "fsmregret/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fsmregret {

double regret(const Sequence& s, const std::vector<double>& predictions) {
  const std::size_t n = s.samples.size();
  if (n == 0) throw std::invalid_argument("regret: empty sequence");
  if (predictions.size() != n) throw std::invalid_argument("regret: length mismatch");
  double loss = 0.0, sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double x = s.samples[t];
    const double d = x - predictions[t];
    loss += d * d;
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum2 / static_cast<double>(n) - mean * mean;
  return loss / static_cast<double>(n) - var;
}

std::pair<double, double> empirical_stats(const Sequence& s) {
  const std::size_t n = s.samples.size();
  if (n == 0) throw std::invalid_argument("empirical_stats: empty sequence");
  double sum = 0.0;
  for (double x : s.samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  double acc = 0.0;
  for (double x : s.samples) acc += (x - mean) * (x - mean);
  return {mean, acc / static_cast<double>(n)};
}

CircleDecomposition decompose_into_circles(const Trajectory& traj, const Sequence& s) {
  const std::size_t n = s.samples.size();
  if (traj.states.size() != n + 1)
    throw std::invalid_argument("decompose_into_circles: trajectory/sequence length mismatch");
  CircleDecomposition out;
  struct Entry {
    int state;
    double sample;
    std::size_t time;
    bool has_sample;
  };
  std::vector<Entry> stack;
  std::vector<int> pos_of_state;
  int max_state = 0;
  for (int st : traj.states) max_state = std::max(max_state, st);
  pos_of_state.assign(static_cast<std::size_t>(max_state) + 1, -1);

  auto close_at = [&](int state) -> int { return pos_of_state[static_cast<std::size_t>(state)]; };

  for (std::size_t t = 0; t <= n; ++t) {
    const int st = traj.states[t];
    const int pos = close_at(st);
    if (pos >= 0) {
      CircleOccurrence occ;
      occ.start = stack[static_cast<std::size_t>(pos)].time;
      for (std::size_t p = static_cast<std::size_t>(pos); p < stack.size(); ++p) {
        occ.states.push_back(stack[p].state);
        occ.samples.push_back(stack[p].sample);
        pos_of_state[static_cast<std::size_t>(stack[p].state)] = -1;
      }
      stack.resize(static_cast<std::size_t>(pos));
      out.occurrences.push_back(std::move(occ));
    }
    Entry e;
    e.state = st;
    e.time = t;
    e.has_sample = t < n;
    e.sample = t < n ? s.samples[t] : 0.0;
    pos_of_state[static_cast<std::size_t>(st)] = static_cast<int>(stack.size());
    stack.push_back(e);
  }
  for (const Entry& e : stack) {
    out.residual_states.push_back(e.state);
    if (e.has_sample) out.residual_samples.push_back(e.sample);
  }
  return out;
}

namespace {

struct Edge {
  int to;
  int jump;
  double lo, hi;
  bool hi_attained;
};

// Nonempty jump intervals clipped to [m.lo, m.hi]; the upper end is attained
// only where the raw cut reaches past hi (closed-top convention).
std::vector<std::vector<Edge>> jump_graph(const Machine& m) {
  std::vector<std::vector<Edge>> g(static_cast<std::size_t>(m.size()));
  for (int i = 0; i < m.size(); ++i) {
    const auto& t = m.transitions[static_cast<std::size_t>(i)];
    for (int j = -t.max_down; j <= t.max_up; ++j) {
      double a = std::max(t.cut(j - 1), m.lo);
      double b = std::min(t.cut(j), m.hi);
      const bool closed_top = t.cut(j) >= m.hi;
      const bool nonempty = closed_top ? (a <= b) : (a < b);
      if (!nonempty) continue;
      g[static_cast<std::size_t>(i)].push_back({i + j, j, a, b, closed_top});
    }
  }
  return g;
}

const Edge* find_edge(const std::vector<std::vector<Edge>>& g, int from, int to) {
  for (const Edge& e : g[static_cast<std::size_t>(from)])
    if (e.to == to) return &e;
  return nullptr;
}

MinimalCircle circle_from_nodes(const std::vector<std::vector<Edge>>& g,
                                const std::vector<int>& nodes) {
  MinimalCircle c;
  c.states = nodes;
  const std::size_t L = nodes.size();
  c.steps.reserve(L);
  for (std::size_t t = 0; t < L; ++t) {
    const Edge* e = find_edge(g, nodes[t], nodes[(t + 1) % L]);
    if (!e) throw std::logic_error("circle step without a matching edge");
    c.steps.push_back({e->jump, e->lo, e->hi, e->hi_attained});
  }
  return c;
}

// Simple-cycle enumeration (Johnson): cycles are emitted rooted at their
// smallest state index, which is the canonical rotation.
class CycleEnumerator {
 public:
  CycleEnumerator(const std::vector<std::vector<Edge>>& g, const OracleCaps& caps)
      : g_(g), caps_(caps), n_(static_cast<int>(g.size())) {}

  std::vector<MinimalCircle> all() {
    std::vector<MinimalCircle> out;
    blocked_.assign(static_cast<std::size_t>(n_), false);
    blist_.assign(static_cast<std::size_t>(n_), {});
    for (root_ = 0; root_ < n_; ++root_) {
      for (int v = root_; v < n_; ++v) {
        blocked_[static_cast<std::size_t>(v)] = false;
        blist_[static_cast<std::size_t>(v)].clear();
      }
      path_.clear();
      circuit(root_, out);
    }
    return out;
  }

 private:
  bool circuit(int v, std::vector<MinimalCircle>& out) {
    bool found = false;
    path_.push_back(v);
    blocked_[static_cast<std::size_t>(v)] = true;
    for (const Edge& e : g_[static_cast<std::size_t>(v)]) {
      if (e.to < root_) continue;
      if (e.to == root_) {
        if (++count_ > caps_.max_circles)
          throw OracleScaleError(
              "oracle scale: circle count exceeds cap; use the scan/probe heuristics");
        out.push_back(circle_from_nodes(g_, path_));
        found = true;
      } else if (!blocked_[static_cast<std::size_t>(e.to)]) {
        if (circuit(e.to, out)) found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (const Edge& e : g_[static_cast<std::size_t>(v)]) {
        if (e.to < root_ || e.to == root_) continue;
        auto& bl = blist_[static_cast<std::size_t>(e.to)];
        if (std::find(bl.begin(), bl.end(), v) == bl.end()) bl.push_back(v);
      }
    }
    path_.pop_back();
    return found;
  }

  void unblock(int v) {
    blocked_[static_cast<std::size_t>(v)] = false;
    auto& bl = blist_[static_cast<std::size_t>(v)];
    while (!bl.empty()) {
      int w = bl.back();
      bl.pop_back();
      if (blocked_[static_cast<std::size_t>(w)]) unblock(w);
    }
  }

  const std::vector<std::vector<Edge>>& g_;
  OracleCaps caps_;
  int n_;
  int root_ = 0;
  std::uint64_t count_ = 0;
  std::vector<bool> blocked_;
  std::vector<std::vector<int>> blist_;
  std::vector<int> path_;
};

// Regret of one circle period with the period's own mean as reference.
double period_regret(const std::vector<double>& xs, const std::vector<double>& preds) {
  const std::size_t L = xs.size();
  double loss = 0.0, sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < L; ++t) {
    const double d = xs[t] - preds[t];
    loss += d * d;
    sum += xs[t];
    sum2 += xs[t] * xs[t];
  }
  const double mean = sum / static_cast<double>(L);
  return loss / static_cast<double>(L) - (sum2 / static_cast<double>(L) - mean * mean);
}

}  // namespace

std::vector<MinimalCircle> enumerate_minimal_circles(const Machine& m, const OracleCaps& caps) {
  require_valid(m);
  if (m.size() > caps.max_states)
    throw OracleScaleError("oracle scale: " + std::to_string(m.size()) +
                           " states exceeds the exact-enumeration cap of " +
                           std::to_string(caps.max_states) +
                           "; use the scan/probe heuristics");
  auto g = jump_graph(m);
  CycleEnumerator en(g, caps);
  return en.all();
}

RegretReport worst_regret_of_circle(const Machine& m, const MinimalCircle& c,
                                    const OracleCaps& caps) {
  const int L = c.length();
  if (L <= 0) throw std::invalid_argument("worst_regret_of_circle: empty circle");
  if (L > caps.max_circle_len || (1ull << L) > caps.max_corners)
    throw OracleScaleError("oracle scale: circle of length " + std::to_string(L) +
                           " exceeds the corner cap; use the scan/probe heuristics");
  std::vector<double> pred(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) pred[static_cast<std::size_t>(t)] = m.states[static_cast<std::size_t>(c.states[static_cast<std::size_t>(t)])];

  const std::uint64_t corners = 1ull << L;
  double best = -std::numeric_limits<double>::infinity();
  std::uint64_t best_mask = 0;
  std::vector<double> xs(static_cast<std::size_t>(L));
  for (std::uint64_t mask = 0; mask < corners; ++mask) {
    double loss = 0.0, sum = 0.0, sum2 = 0.0;
    for (int t = 0; t < L; ++t) {
      const auto& st = c.steps[static_cast<std::size_t>(t)];
      const double x = (mask >> t) & 1u ? st.hi : st.lo;
      const double d = x - pred[static_cast<std::size_t>(t)];
      loss += d * d;
      sum += x;
      sum2 += x * x;
    }
    const double mean = sum / L;
    const double value = loss / L - (sum2 / L - mean * mean);
    if (value > best) {
      best = value;
      best_mask = mask;
    }
  }

  RegretReport rep;
  rep.value = best;
  rep.circle = c.states;
  rep.exact = true;
  rep.attained = true;
  rep.witness.resize(static_cast<std::size_t>(L));
  for (int t = 0; t < L; ++t) {
    const auto& st = c.steps[static_cast<std::size_t>(t)];
    const bool up = (best_mask >> t) & 1u;
    rep.witness[static_cast<std::size_t>(t)] = up ? st.hi : st.lo;
    if (up && !st.hi_attained) rep.attained = false;
  }
  return rep;
}

RegretReport max_regret(const Machine& m, const OracleCaps& caps) {
  auto circles = enumerate_minimal_circles(m, caps);
  if (circles.empty()) throw std::logic_error("max_regret: no circles in a valid machine");
  RegretReport best;
  bool first = true;
  for (const auto& c : circles) {
    RegretReport r = worst_regret_of_circle(m, c, caps);
    if (first || r.value > best.value) {
      best = std::move(r);
      first = false;
    }
  }
  return best;
}

TsRun threshold_sequence(const Machine& m, double x, int start, int horizon) {
  require_valid(m);
  if (start < 0 || start >= m.size()) throw std::out_of_range("threshold_sequence: bad start");
  if (horizon < 0) horizon = 2 * m.size() + 4;
  TsRun out;
  out.seq.lo = m.lo;
  out.seq.hi = m.hi;
  out.states.reserve(static_cast<std::size_t>(horizon) + 1);
  out.states.push_back(start);
  std::vector<int> first_seen(static_cast<std::size_t>(m.size()), -1);
  first_seen[static_cast<std::size_t>(start)] = 0;
  int cur = start;
  for (int t = 0; t < horizon; ++t) {
    const double sample = m.states[static_cast<std::size_t>(cur)] < x ? m.hi : m.lo;
    out.seq.samples.push_back(sample);
    cur = detail::step_fast(m, cur, sample);
    out.states.push_back(cur);
    if (out.cycle_start < 0) {
      int& seen = first_seen[static_cast<std::size_t>(cur)];
      if (seen >= 0) {
        out.cycle_start = seen;
        out.cycle.assign(out.states.begin() + seen, out.states.end() - 1);
      } else {
        seen = t + 1;
      }
    }
  }
  return out;
}

namespace {

// Circle regret of one threshold-sequence cycle; the emitted samples are a
// function of the state alone.
RegretReport ts_cycle_report(const Machine& m, double x, const std::vector<int>& cycle) {
  RegretReport rep;
  rep.circle = cycle;
  rep.exact = false;
  rep.attained = true;
  std::vector<double> preds;
  preds.reserve(cycle.size());
  rep.witness.reserve(cycle.size());
  for (int st : cycle) {
    preds.push_back(m.states[static_cast<std::size_t>(st)]);
    rep.witness.push_back(m.states[static_cast<std::size_t>(st)] < x ? m.hi : m.lo);
  }
  rep.value = period_regret(rep.witness, preds);
  return rep;
}

void canonical_rotate(std::vector<int>& cycle) {
  auto it = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), it, cycle.end());
}

}  // namespace

RegretReport adversary_scan(const Machine& m, double grid) {
  require_valid(m);
  if (!(grid > 0)) throw std::invalid_argument("adversary_scan: grid must be positive");
  const int k = m.size();
  RegretReport best;
  best.exact = false;
  best.value = -std::numeric_limits<double>::infinity();
  const long steps = static_cast<long>(std::ceil(m.width() / grid));
  std::vector<char> seen(static_cast<std::size_t>(k));
  std::vector<int> first_seen(static_cast<std::size_t>(k));
  std::vector<int> walk;
  for (long gi = 0; gi <= steps; ++gi) {
    const double x = std::min(m.lo + static_cast<double>(gi) * grid, m.hi);
    std::fill(seen.begin(), seen.end(), 0);
    for (int s0 = 0; s0 < k; ++s0) {
      if (seen[static_cast<std::size_t>(s0)]) continue;
      walk.clear();
      std::fill(first_seen.begin(), first_seen.end(), -1);
      int cur = s0;
      while (true) {
        if (seen[static_cast<std::size_t>(cur)]) break;  // merged into an already-scanned basin
        if (first_seen[static_cast<std::size_t>(cur)] >= 0) {
          std::vector<int> cycle(walk.begin() + first_seen[static_cast<std::size_t>(cur)],
                                 walk.end());
          canonical_rotate(cycle);
          RegretReport r = ts_cycle_report(m, x, cycle);
          if (r.value > best.value) best = std::move(r);
          break;
        }
        first_seen[static_cast<std::size_t>(cur)] = static_cast<int>(walk.size());
        walk.push_back(cur);
        const double sample = m.states[static_cast<std::size_t>(cur)] < x ? m.hi : m.lo;
        cur = detail::step_fast(m, cur, sample);
      }
      for (int v : walk) seen[static_cast<std::size_t>(v)] = 1;
    }
  }
  return best;
}

RegretReport probe_random_circles(const Machine& m, int probes, std::uint64_t seed) {
  require_valid(m);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(m.lo, m.hi);
  const int k = m.size();
  auto g = jump_graph(m);

  RegretReport best;
  best.exact = false;
  best.value = -std::numeric_limits<double>::infinity();

  // Stack pairs each visited state with the sample consumed on leaving it; a
  // revisit closes a minimal circle exactly as in the trajectory decomposition.
  std::vector<int> stack_state;
  std::vector<double> stack_sample;
  std::vector<int> pos(static_cast<std::size_t>(k), -1);
  int cur = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
  pos[static_cast<std::size_t>(cur)] = 0;
  stack_state.push_back(cur);
  stack_sample.push_back(0.0);
  int found = 0;
  OracleCaps probe_caps;
  probe_caps.max_states = k;
  probe_caps.max_circle_len = 12;
  probe_caps.max_corners = 1ull << 12;

  while (found < probes) {
    // Mostly uniform samples; sometimes a corner or midpoint of a random jump
    // interval of the current state so rare extreme jumps get exercised.
    double x;
    const auto& edges = g[static_cast<std::size_t>(cur)];
    if ((rng() & 3u) == 0 && !edges.empty()) {
      const Edge& e = edges[rng() % edges.size()];
      x = (rng() & 1u) ? e.lo : std::min(0.5 * (e.lo + e.hi), m.hi);
    } else {
      x = uni(rng);
    }
    stack_sample.back() = x;
    const int next = detail::step_fast(m, cur, x);
    const int p = pos[static_cast<std::size_t>(next)];
    if (p >= 0) {
      std::vector<int> cycle(stack_state.begin() + p, stack_state.end());
      std::vector<double> samples(stack_sample.begin() + p, stack_sample.end());
      ++found;
      bool scored = false;
      if (static_cast<int>(cycle.size()) <= probe_caps.max_circle_len) {
        std::vector<int> canon = cycle;
        canonical_rotate(canon);
        MinimalCircle c = circle_from_nodes(g, canon);
        RegretReport r = worst_regret_of_circle(m, c, probe_caps);
        if (r.value > best.value) best = std::move(r);
        scored = true;
      }
      if (!scored) {
        std::vector<double> preds;
        preds.reserve(cycle.size());
        for (int st : cycle) preds.push_back(m.states[static_cast<std::size_t>(st)]);
        const double v = period_regret(samples, preds);
        if (v > best.value) {
          best = RegretReport{};
          best.exact = false;
          best.value = v;
          best.circle = cycle;
          best.witness = samples;
        }
      }
      for (std::size_t q = static_cast<std::size_t>(p); q < stack_state.size(); ++q)
        pos[static_cast<std::size_t>(stack_state[q])] = -1;
      stack_state.resize(static_cast<std::size_t>(p));
      stack_sample.resize(static_cast<std::size_t>(p));
    }
    pos[static_cast<std::size_t>(next)] = static_cast<int>(stack_state.size());
    stack_state.push_back(next);
    stack_sample.push_back(0.0);
    cur = next;
  }
  return best;
}

double simulate_witness_regret(const Machine& m, const RegretReport& r, int repetitions,
                               double xi) {
  if (r.circle.empty() || r.witness.size() != r.circle.size())
    throw std::invalid_argument("simulate_witness_regret: report carries no circle witness");
  const std::size_t L = r.circle.size();
  std::vector<double> nudged(L);
  for (std::size_t t = 0; t < L; ++t) {
    const int from = r.circle[t];
    const int want = r.circle[(t + 1) % L];
    double x = r.witness[t];
    if (detail::step_fast(m, from, x) != want) {
      x -= xi;  // witness sits on an open interval end
      if (detail::step_fast(m, from, x) != want)
        throw std::logic_error("simulate_witness_regret: witness does not ride its circle");
    }
    nudged[t] = x;
  }
  Sequence s;
  s.lo = m.lo;
  s.hi = m.hi;
  s.samples.reserve(L * static_cast<std::size_t>(repetitions));
  for (int rep = 0; rep < repetitions; ++rep)
    s.samples.insert(s.samples.end(), nudged.begin(), nudged.end());
  Trajectory traj = run(m, s, r.circle.front());
  return regret(s, traj.predictions);
}

}  // namespace fsmregret
