// verify.hpp — the cross-module invariant battery behind `defectlab verify`:
// every module's documented invariants run at pinned tolerances, results land
// in a machine-readable summary, artifacts are byte-deterministic per seed.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace defectlab {

struct InvariantResult {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

struct VerifySummary {
  int passed = 0;
  int failed = 0;
  int skipped = 0;
  std::vector<InvariantResult> results;
  bool ok() const { return failed == 0; }
};

/// Runs the battery, writes {out_dir}/summary.json and {out_dir}/verify.csv.
/// `schema_dir` locates the shipped output schemas (the schema invariant is
/// skipped when absent). `inject_failure` appends a deliberately failing
/// check (regression hook for the harness itself).
VerifySummary run_verification(std::uint64_t seed, const std::string& out_dir,
                               const std::string& schema_dir = "schema",
                               bool inject_failure = false);

}  // namespace defectlab
