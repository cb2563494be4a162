#pragma once

#include <string>

#include "fsmregret/machine.hpp"
#include "fsmregret/oracle.hpp"

namespace fsmregret {

// Machine files are JSON documents {version, family, states, max_down,
// thresholds[, bounds]} with numbers at full double precision; loading
// re-validates. Sequence files carry one plain decimal sample per line.

std::string machine_to_json(const Machine& m);
Machine machine_from_json(const std::string& text);
void save_machine(const Machine& m, const std::string& path);
Machine load_machine(const std::string& path);

void save_sequence(const Sequence& s, const std::string& path);
Sequence load_sequence(const std::string& path, double lo = 0.0, double hi = 1.0);

std::string report_to_json(const RegretReport& r);
RegretReport report_from_json(const std::string& text);
void save_report(const RegretReport& r, const std::string& path);

void save_predictions(const std::vector<double>& predictions, const std::string& path);

}  // namespace fsmregret
