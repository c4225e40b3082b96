#ifndef RWRSLAB_EXPERIMENTS_HPP
#define RWRSLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwrslab/procgen.hpp"
#include "rwrslab/report.hpp"

namespace rwrslab {

// Named reproducible experiments.  Each catalog entry maps to one of the
// acceptance checks; the CLI `run` subcommand drives them from a config
// file, and `verify --suite acceptance` runs the full battery.

struct ExperimentConfig {
  std::string name;
  nlohmann::json params;  // experiment-specific knobs + optional "process"
  std::uint64_t seed = 1;
  int workers = 1;
};

std::vector<std::string> experiment_catalog();

// Throws std::invalid_argument for unknown experiments or exceeded budgets.
std::vector<ReportRecord> run_experiment(const ExperimentConfig& config);

// Builds a process model from a JSON description:
// { "base": {"transitions": [[..]]},
//   "cocycle": {"range": r, "table": [..]},
//   "scenery": {"kind": "iid"|"markov"|"trivial", "alphabet": k,
//               "probs": [..] | "transitions": [[..]], "cell_width": w},
//   "metric": {"p": 16, "rho": 0} }
ProcessModel process_from_json(const nlohmann::json& doc);

struct AcceptanceOutcome {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

// Runs the acceptance battery (all criteria when `subset` is empty) and
// prints one pass/fail line per criterion to `log`.
std::vector<AcceptanceOutcome> run_acceptance(const std::vector<int>& subset,
                                              int workers, std::ostream& log);

}  // namespace rwrslab

#endif  // RWRSLAB_EXPERIMENTS_HPP
