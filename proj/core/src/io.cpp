#include "fsmregret/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fsmregret {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("short write to " + path);
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string machine_to_json(const Machine& m) {
  json doc;
  doc["version"] = 1;
  doc["family"] = family_name(m.family);
  if (m.lo != 0.0 || m.hi != 1.0) doc["bounds"] = {m.lo, m.hi};
  doc["states"] = m.states;
  json md = json::array();
  json th = json::array();
  for (const auto& t : m.transitions) {
    md.push_back(t.max_down);
    th.push_back(t.cuts);
  }
  doc["max_down"] = md;
  doc["thresholds"] = th;
  return doc.dump(2) + "\n";
}

Machine machine_from_json(const std::string& text) {
  json doc = json::parse(text);
  Machine m;
  if (doc.value("version", 1) != 1) throw std::runtime_error("unknown machine file version");
  auto fam = family_from_name(doc.value("family", "custom"));
  if (!fam) throw std::runtime_error("unknown machine family tag");
  m.family = *fam;
  if (doc.contains("bounds")) {
    m.lo = doc["bounds"].at(0).get<double>();
    m.hi = doc["bounds"].at(1).get<double>();
  }
  m.states = doc.at("states").get<std::vector<double>>();
  const auto md = doc.at("max_down").get<std::vector<int>>();
  const auto th = doc.at("thresholds").get<std::vector<std::vector<double>>>();
  if (md.size() != m.states.size() || th.size() != m.states.size())
    throw std::runtime_error("machine file: array lengths disagree");
  m.transitions.resize(m.states.size());
  for (std::size_t i = 0; i < m.states.size(); ++i) {
    StateTransitions t;
    t.max_down = md[i];
    t.cuts = th[i];
    t.max_up = static_cast<int>(t.cuts.size()) - t.max_down - 2;
    if (t.max_up < 0) throw std::runtime_error("machine file: threshold list too short");
    m.transitions[i] = std::move(t);
  }
  require_valid(m);
  return m;
}

void save_machine(const Machine& m, const std::string& path) {
  write_file(path, machine_to_json(m));
}

Machine load_machine(const std::string& path) { return machine_from_json(read_file(path)); }

void save_sequence(const Sequence& s, const std::string& path) {
  std::ostringstream os;
  for (double x : s.samples) os << fmt_full(x) << "\n";
  write_file(path, os.str());
}

Sequence load_sequence(const std::string& path, double lo, double hi) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Sequence s;
  s.lo = lo;
  s.hi = hi;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(line, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": not a number");
    }
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos != line.size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": trailing characters");
    if (v < lo || v > hi)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": sample " + fmt_full(v) +
                               " outside [" + fmt_full(lo) + "," + fmt_full(hi) + "]");
    s.samples.push_back(v);
  }
  return s;
}

std::string report_to_json(const RegretReport& r) {
  json doc;
  doc["regret"] = r.value;
  doc["witness"] = r.witness;
  doc["circle"] = r.circle;
  doc["attained"] = r.attained;
  doc["exact"] = r.exact;
  doc["xi"] = r.xi;
  return doc.dump(2) + "\n";
}

RegretReport report_from_json(const std::string& text) {
  json doc = json::parse(text);
  RegretReport r;
  r.value = doc.at("regret").get<double>();
  r.witness = doc.value("witness", std::vector<double>{});
  r.circle = doc.value("circle", std::vector<int>{});
  r.attained = doc.value("attained", true);
  r.exact = doc.value("exact", true);
  r.xi = doc.value("xi", 0.0);
  return r;
}

void save_report(const RegretReport& r, const std::string& path) {
  write_file(path, report_to_json(r));
}

void save_predictions(const std::vector<double>& predictions, const std::string& path) {
  std::ostringstream os;
  for (double x : predictions) os << fmt_full(x) << "\n";
  write_file(path, os.str());
}

}  // namespace fsmregret
