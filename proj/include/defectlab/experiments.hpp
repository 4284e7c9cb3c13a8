// experiments.hpp — named experiment runners behind the CLI: each consumes a
// parsed config, writes {output_dir}/{experiment}.csv and verdict.json, and
// returns the exit code contract (0 verdict-match, 1 mismatch/failure,
// 2 usage).

#pragma once

#include <string>

#include "json.hpp"

#include "defectlab/config.hpp"

namespace defectlab {

inline constexpr const char* kExperimentNames[] = {
    "commutator", "hdist", "localization", "averaging", "bands", "basis"};

bool is_known_experiment(const std::string& name);

struct RunOutcome {
  int exit_code = 0;
  std::string verdict;
  nlohmann::json verdict_json;
};

/// Runs one named experiment; writes CSV + verdict.json artifacts under
/// cfg.output_dir. exit 0 iff the verdict matches cfg.expected (a run with no
/// expectation always exits 0).
RunOutcome run_experiment(const std::string& experiment, const ExperimentConfig& cfg);

struct CheckSymbolOutcome {
  int exit_code = 0;
  nlohmann::json report;
};

/// classify_leading + homogeneity identity + Marcinkiewicz certification of
/// the smoothing symbol (and the config's psi, when named) + degeneracy scan.
CheckSymbolOutcome check_symbol(const ExperimentConfig& cfg);

}  // namespace defectlab
