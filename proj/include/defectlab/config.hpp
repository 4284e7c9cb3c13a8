// config.hpp — structured experiment configuration (JSON) and its mapping to
// grids, anisotropies, principal symbols and sequence families.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "defectlab/grid.hpp"
#include "defectlab/sequences.hpp"
#include "defectlab/symbols.hpp"

namespace defectlab {

struct ExperimentConfig {
  nlohmann::json raw;
  GridSpec grid;  // x axes (+ optional y axes)
  Anisotropy aniso;
  std::vector<int> ladder;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string expected;  // "", "compact", "non-compact", "zero", "nonzero"
};

/// Throws std::invalid_argument / nlohmann::json::exception on bad configs
/// (the CLI maps these to exit code 2).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Lossless round trip: the parsed config echoes its raw document.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Coefficients come either from the expression whitelist or from sampled
/// field files ({"file": "path"}).
PhaseSpaceField coefficient_from_json(const nlohmann::json& j, const GridSpec& grid);

PrincipalSymbol build_symbol(const ExperimentConfig& cfg);

struct BuiltFamily {
  PhaseFamily u;
  ScalarFamily v;
  PhaseFamily source;  // zero fields when not windowed
  bool windowed = false;
  bool has_y = false;
};

/// Families by name: "oscillation", "concentration", "transport".
BuiltFamily build_family(const ExperimentConfig& cfg);

}  // namespace defectlab
