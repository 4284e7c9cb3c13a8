// defectlab — experiment runner CLI.
//
//   defectlab check-symbol --config cfg.json
//   defectlab run <commutator|hdist|localization|averaging|bands|basis> --config cfg.json
//   defectlab verify [--out dir] [--seed N]
//
// Exit codes: 0 pass, 1 verdict/certification/invariant failure, 2 usage or
// config errors.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "defectlab/config.hpp"
#include "defectlab/experiments.hpp"
#include "defectlab/report.hpp"
#include "defectlab/verify.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::vector<int> ladder;
};

defectlab::ExperimentConfig load_with_overrides(const CommonOpts& o) {
  defectlab::ExperimentConfig cfg = defectlab::load_config(o.config_path);
  if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.ladder.empty()) cfg.ladder = o.ladder;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defectlab: multiplier, defect-measure and velocity-averaging experiments"};
  app.require_subcommand(1);

  CommonOpts check_opts, run_opts;
  std::string experiment;

  CLI::App* check = app.add_subcommand("check-symbol", "certify a principal symbol");
  check->add_option("--config", check_opts.config_path, "config JSON path")->required();
  check->add_option("--out", check_opts.out_dir, "output directory override");
  check->add_option("--seed", check_opts.seed, "seed override")
      ->each([&](const std::string&) { check_opts.seed_set = true; });

  CLI::App* run = app.add_subcommand("run", "run a named experiment");
  run->add_option("experiment", experiment, "experiment name")->required();
  run->add_option("--config", run_opts.config_path, "config JSON path")->required();
  run->add_option("--out", run_opts.out_dir, "output directory override");
  run->add_option("--seed", run_opts.seed, "seed override")
      ->each([&](const std::string&) { run_opts.seed_set = true; });
  run->add_option("--ladder", run_opts.ladder, "index ladder override")->delimiter(',');

  std::string verify_out = "out";
  std::string schema_dir = "schema";
  std::uint64_t verify_seed = 1;
  bool inject_failure = false;
  CLI::App* verify = app.add_subcommand("verify", "run the invariant battery");
  verify->add_option("--out", verify_out, "output directory");
  verify->add_option("--seed", verify_seed, "battery seed");
  verify->add_option("--schema-dir", schema_dir, "location of the shipped schemas");
  verify->add_flag("--inject-failure", inject_failure,
                   "append a deliberately failing invariant");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (check->parsed()) {
      const auto cfg = load_with_overrides(check_opts);
      const auto outcome = defectlab::check_symbol(cfg);
      std::printf("%s\n", outcome.report.dump(2).c_str());
      return outcome.exit_code;
    }
    if (run->parsed()) {
      if (!defectlab::is_known_experiment(experiment)) {
        std::fprintf(stderr, "unknown experiment '%s'\n", experiment.c_str());
        return 2;
      }
      const auto cfg = load_with_overrides(run_opts);
      const auto outcome = defectlab::run_experiment(experiment, cfg);
      std::printf("%s: verdict %s\n", experiment.c_str(), outcome.verdict.c_str());
      return outcome.exit_code;
    }
    if (verify->parsed()) {
      const auto summary =
          defectlab::run_verification(verify_seed, verify_out, schema_dir, inject_failure);
      for (const auto& r : summary.results) {
        const char* status = r.skipped ? "SKIP" : (r.passed ? "PASS" : "FAIL");
        std::printf("[%s] %s%s%s\n", status, r.name.c_str(),
                    r.detail.empty() ? "" : " — ", r.detail.c_str());
      }
      std::printf("passed %d, failed %d, skipped %d\n", summary.passed, summary.failed,
                  summary.skipped);
      return summary.ok() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
