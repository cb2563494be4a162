#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "fsmregret/bounds.hpp"
#include "fsmregret/dtm.hpp"
#include "fsmregret/edm.hpp"
#include "fsmregret/eedm.hpp"
#include "fsmregret/io.hpp"
#include "fsmregret/oracle.hpp"

using namespace fsmregret;

namespace {

constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;
constexpr int kExitScale = 4;

std::uint64_t probe_seed() {
  if (const char* env = std::getenv("FSM_REGRET_SEED")) return std::strtoull(env, nullptr, 10);
  return 20240913ull;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SweepRecord {
  std::string family;
  double param = 0.0;
  int states = 0;
  double regret_lower = 0.0;
  double regret_upper = 0.0;
  bool exact = false;
  bool failed = false;
  std::string error;
  double wall_ms = 0.0;
};

SweepRecord sweep_row(const std::string& family, double param, std::uint64_t seed) {
  SweepRecord rec;
  rec.family = family;
  rec.param = param;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Machine m;
    double analytic_upper = 0.0;
    if (family == "dtm") {
      m = build_dtm({param, DtmParity::auto_select, 1e-6, 1e-12});
      analytic_upper = param;
    } else if (family == "edm") {
      m = build_edm(static_cast<int>(param));
      analytic_upper = edm_bounds(static_cast<int>(param)).second;
    } else if (family == "eedm") {
      m = build_eedm(param);
      analytic_upper = param;
    } else {
      throw std::invalid_argument("unknown family " + family);
    }
    rec.states = m.size();
    OracleCaps caps;
    if (m.size() <= caps.max_states) {
      try {
        rec.regret_lower = rec.regret_upper = max_regret(m, caps).value;
        rec.exact = true;
      } catch (const OracleScaleError&) {
        rec.exact = false;
      }
    }
    if (!rec.exact) {
      double lower = adversary_scan(m, 1e-3).value;
      lower = std::max(lower, probe_random_circles(m, 2000, seed).value);
      rec.regret_lower = lower;
      rec.regret_upper = analytic_upper;
    }
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return rec;
}

void write_sweep_csv(const std::vector<SweepRecord>& rows, const std::string& path) {
  std::ostringstream os;
  os << "family,param,states,regret_lower,regret_upper,exact\n";
  for (const auto& r : rows) {
    if (r.failed) {
      os << r.family << "," << fmt(r.param) << ",0,nan,nan,0\n";
    } else {
      os << r.family << "," << fmt(r.param) << "," << r.states << "," << fmt(r.regret_lower)
         << "," << fmt(r.regret_upper) << "," << (r.exact ? 1 : 0) << "\n";
    }
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << os.str();
}

bool parse_range(const std::string& text, double& lo, double& hi, int& n) {
  std::istringstream is(text);
  char c1, c2;
  return static_cast<bool>(is >> lo >> c1 >> hi >> c2 >> n) && c1 == ':' && c2 == ':' &&
         n >= 1 && lo <= hi;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"finite-state predictors for bounded sequences: build, run, and stress them"};
  app.require_subcommand(1);

  // ---- build ----------------------------------------------------------
  auto* build = app.add_subcommand("build", "construct a machine and write it to JSON");
  build->require_subcommand(1);
  std::string build_out = "machine.json";
  double build_regret = 0.1;
  int build_states = 1000;
  std::string parity = "auto";
  double scan_step = 1e-6;

  auto* build_dtm_cmd = build->add_subcommand("dtm", "smallest tracking-memory machine");
  build_dtm_cmd->add_option("--regret", build_regret, "worst-case regret budget")->required();
  build_dtm_cmd->add_option("--parity", parity, "odd|even|auto")
      ->check(CLI::IsMember({"odd", "even", "auto"}));
  build_dtm_cmd->add_option("--scan-step", scan_step, "state search tolerance");
  build_dtm_cmd->add_option("-o,--output", build_out, "machine file");

  auto* build_edm_cmd = build->add_subcommand("edm", "uniform-grid decaying-memory machine");
  build_edm_cmd->add_option("--states", build_states, "number of states")->required();
  build_edm_cmd->add_option("-o,--output", build_out, "machine file");

  auto* build_eedm_cmd = build->add_subcommand("eedm", "segment-spaced decaying-memory machine");
  build_eedm_cmd->add_option("--regret", build_regret, "worst-case regret budget")->required();
  build_eedm_cmd->add_option("-o,--output", build_out, "machine file");

  // ---- predict --------------------------------------------------------
  auto* predict = app.add_subcommand("predict", "run a machine over a sample file");
  std::string machine_path, input_path, preds_out = "predictions.txt";
  std::vector<double> pr_bounds{0.0, 1.0};
  int start_state = -1;
  predict->add_option("--machine", machine_path, "machine JSON")->required();
  predict->add_option("--input", input_path, "sample file, one value per line")->required();
  predict->add_option("-o,--output", preds_out, "predictions file");
  predict->add_option("--bounds", pr_bounds, "sample bounds a b")->expected(2);
  predict->add_option("--start", start_state, "start state index (default: nearest midpoint)");

  // ---- eval -----------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "certify worst-case regret of a machine");
  std::string eval_mode = "exact";
  std::string report_out;
  double grid = 1e-3;
  int cap_states = OracleCaps{}.max_states;
  eval->add_option("--machine", machine_path, "machine JSON")->required();
  eval->add_option("--mode", eval_mode, "exact|scan")->check(CLI::IsMember({"exact", "scan"}));
  eval->add_option("--grid", grid, "scan grid step");
  eval->add_option("--cap", cap_states, "exact-mode state cap");
  eval->add_option("-o,--output", report_out, "report JSON");

  // ---- adversary ------------------------------------------------------
  auto* adversary = app.add_subcommand("adversary", "emit a worst-case input sequence");
  auto* adv_edm = adversary->add_subcommand("edm", "circle rider for the uniform-grid machine");
  int adv_states = 1000;
  double adv_xi = 1e-9;
  std::string adv_out = "seq.txt";
  adv_edm->add_option("--states", adv_states, "number of states")->required();
  adv_edm->add_option("--xi", adv_xi, "inward nudge off interval edges");
  adv_edm->add_option("-o,--output", adv_out, "sequence file");

  // ---- bounds ---------------------------------------------------------
  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form state/regret tradeoffs");
  double bounds_regret = 0.01;
  std::string sweep_spec, bounds_csv;
  auto* bro = bounds_cmd->add_option("--regret", bounds_regret, "regret value to tabulate");
  bounds_cmd->add_option("--sweep", sweep_spec, "lo:hi:n regret grid");
  bounds_cmd->add_option("--csv", bounds_csv, "write the sweep as CSV");

  // ---- sweep ----------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "build machines across a parameter grid");
  std::string sweep_family = "dtm";
  std::string sweep_range;
  std::string sweep_csv = "sweep.csv";
  int jobs = 4;
  sweep->add_option("--family", sweep_family, "dtm|edm|eedm")
      ->check(CLI::IsMember({"dtm", "edm", "eedm"}));
  sweep->add_option("--range", sweep_range, "lo:hi:n parameter grid")->required();
  sweep->add_option("--csv", sweep_csv, "output CSV")->required();
  sweep->add_option("--jobs", jobs, "concurrent rows");

  CLI11_PARSE(app, argc, argv);

  if (build->parsed()) {
    Machine m;
    double certificate = 0.0;
    if (build_dtm_cmd->parsed()) {
      DtmParity p = parity == "odd"    ? DtmParity::odd
                    : parity == "even" ? DtmParity::even
                                       : DtmParity::auto_select;
      m = build_dtm({build_regret, p, scan_step, 1e-12});
      certificate = build_regret;
    } else if (build_edm_cmd->parsed()) {
      m = build_edm(build_states);
      certificate = edm_bounds(build_states).second;
    } else {
      m = build_eedm(build_regret);
      certificate = build_regret;
    }
    save_machine(m, build_out);
    std::printf("states: %d\n", m.size());
    std::printf("regret_certificate: %s\n", fmt(certificate).c_str());
    std::printf("wrote %s\n", build_out.c_str());
    return 0;
  }

  if (predict->parsed()) {
    Machine m = load_machine(machine_path);
    if (pr_bounds[0] != m.lo || pr_bounds[1] != m.hi)
      m = rescale_machine(m, pr_bounds[0], pr_bounds[1]);
    Sequence s = load_sequence(input_path, pr_bounds[0], pr_bounds[1]);
    if (s.samples.empty()) throw std::runtime_error("empty input sequence");
    int start = start_state;
    if (start < 0) {
      const double mid = 0.5 * (m.lo + m.hi);
      start = 0;
      for (int i = 1; i < m.size(); ++i)
        if (std::abs(m.states[i] - mid) < std::abs(m.states[start] - mid)) start = i;
    }
    Trajectory traj = run(m, s, start);
    save_predictions(traj.predictions, preds_out);
    auto [mean, var] = empirical_stats(s);
    const double machine_regret = regret(s, traj.predictions);
    const double cma_regret = regret(s, cma_predict(s, 0.5 * (m.lo + m.hi)));
    std::printf("samples: %zu\n", s.samples.size());
    std::printf("empirical_mean: %s\n", fmt(mean).c_str());
    std::printf("empirical_variance: %s\n", fmt(var).c_str());
    std::printf("machine_regret: %s\n", fmt(machine_regret).c_str());
    std::printf("cma_regret: %s\n", fmt(cma_regret).c_str());
    std::printf("wrote %s\n", preds_out.c_str());
    return 0;
  }

  if (eval->parsed()) {
    Machine m = load_machine(machine_path);
    RegretReport rep;
    if (eval_mode == "exact") {
      OracleCaps caps;
      caps.max_states = cap_states;
      rep = max_regret(m, caps);
      rep.xi = 1e-9;
      std::printf("max_regret: %s\n", fmt(rep.value).c_str());
      std::printf("witness_circle:");
      for (int st : rep.circle) std::printf(" %d", st);
      std::printf("\nwitness_samples:");
      for (double x : rep.witness) std::printf(" %s", fmt(x).c_str());
      std::printf("\nattained: %s\n", rep.attained ? "true" : "false");
    } else {
      rep = adversary_scan(m, grid);
      RegretReport probe = probe_random_circles(m, 10000, probe_seed());
      if (probe.value > rep.value) rep = std::move(probe);
      std::printf("regret_lower_bound: %s\n", fmt(rep.value).c_str());
    }
    if (!report_out.empty()) {
      save_report(rep, report_out);
      std::printf("wrote %s\n", report_out.c_str());
    }
    return 0;
  }

  if (adversary->parsed()) {
    EdmAdversary adv = edm_adversary(adv_states, adv_xi);
    Sequence s;
    s.samples = adv.samples;
    save_sequence(s, adv_out);
    std::printf("period: %zu\n", adv.samples.size());
    std::printf("up_jump: %d\n", adv.m);
    std::printf("predicted_regret: %s\n", fmt(adv.predicted_regret).c_str());
    std::printf("xi: %s\n", fmt(adv.xi).c_str());
    std::printf("wrote %s\n", adv_out.c_str());
    return 0;
  }

  if (bounds_cmd->parsed()) {
    if (!sweep_spec.empty()) {
      double lo, hi;
      int n;
      if (!parse_range(sweep_spec, lo, hi, n)) throw std::runtime_error("bad --sweep lo:hi:n");
      auto curve = bound_curve(lo, hi, n);
      std::ostringstream os;
      os << "regret,dtm_feasible,edm_states,eedm_lower,eedm_upper_raw,eedm_upper,fsm_lower\n";
      for (const auto& p : curve)
        os << fmt(p.regret) << "," << (p.dtm_feasible ? 1 : 0) << "," << fmt(p.edm_states)
           << "," << fmt(p.eedm.lower) << "," << fmt(p.eedm.upper_raw) << ","
           << fmt(p.eedm.upper) << "," << fmt(p.fsm_lower) << "\n";
      if (bounds_csv.empty()) {
        std::fputs(os.str().c_str(), stdout);
      } else {
        std::ofstream out(bounds_csv);
        if (!out) throw std::runtime_error("cannot write " + bounds_csv);
        out << os.str();
        std::printf("wrote %s\n", bounds_csv.c_str());
      }
      return 0;
    }
    if (!*bro) throw std::runtime_error("bounds: pass --regret or --sweep");
    const double r = bounds_regret;
    auto eedm = eedm_state_count_bounds(r);
    std::printf("dtm_feasible: %s\n", dtm_feasibility(r).first ? "true" : "false");
    std::printf("edm_states_estimate: %s\n", fmt(std::pow(2.0 * r, -1.5)).c_str());
    std::printf("eedm_states_lower: %s\n", fmt(eedm.lower).c_str());
    std::printf("eedm_states_upper_raw: %s\n", fmt(eedm.upper_raw).c_str());
    std::printf("eedm_states_upper: %s\n", fmt(eedm.upper).c_str());
    std::printf("fsm_states_lower_bound: %s\n",
                fmt(r < 0.25 ? fsm_state_lower_bound(r) : 0.0).c_str());
    return 0;
  }

  if (sweep->parsed()) {
    double lo, hi;
    int n;
    if (!parse_range(sweep_range, lo, hi, n)) throw std::runtime_error("bad --range lo:hi:n");
    std::vector<double> params;
    for (int i = 0; i < n; ++i)
      params.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
    const std::uint64_t seed = probe_seed();
    std::vector<SweepRecord> rows(params.size());
    const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
    for (std::size_t base = 0; base < params.size(); base += width) {
      std::vector<std::future<SweepRecord>> batch;
      for (std::size_t i = base; i < std::min(params.size(), base + width); ++i)
        batch.push_back(std::async(std::launch::async, sweep_row, sweep_family, params[i], seed));
      for (std::size_t i = 0; i < batch.size(); ++i) rows[base + i] = batch[i].get();
    }
    write_sweep_csv(rows, sweep_csv);
    for (const auto& r : rows)
      if (r.failed)
        std::fprintf(stderr, "row %s=%s failed: %s\n", r.family.c_str(), fmt(r.param).c_str(),
                     r.error.c_str());
    std::printf("wrote %s (%zu rows)\n", sweep_csv.c_str(), rows.size());
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kExitInfeasible;
  } catch (const OracleScaleError& e) {
    std::fprintf(stderr, "oracle scale: %s\n", e.what());
    return kExitScale;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "validation: %s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "validation: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
