// CLI contract tests: exit codes, artifacts, determinism. Takes the binary
// path as argv[1] and drives it through std::system.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++failures;
}

struct RunResult {
  int exit_code;
  std::string output;
};

RunResult run(const std::string& cmd) {
  const std::string full = cmd + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return {127, "popen failed"};
  std::string out;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_json_file(const fs::path& p, const nlohmann::json& j) {
  std::ofstream os(p);
  os << j.dump(2);
}

nlohmann::json transport_config(const std::string& out_dir, bool degenerate,
                                const std::string& expected) {
  nlohmann::json a;
  if (degenerate) {
    a = {{"kind", "constant"}, {"value", {1.0, 0.0}}};
  } else {
    a = {{"kind", "coordinate"}, {"axis", 0}};
  }
  return nlohmann::json{
      {"grid",
       {{"extent_x", {1.0, 1.0}},
        {"samples_x", {128, 128}},
        {"extent_y", {1.0}},
        {"samples_y", {64}}}},
      {"anisotropy", {{"beta", {1.0, 1.0}}}},
      {"symbol",
       {{"terms",
         {{{"alpha", {1.0, 0.0}},
           {"coefficient", {{"kind", "constant"}, {"value", {1.0, 0.0}}}}},
          {{"alpha", {0.0, 1.0}},
           {"coefficient",
            degenerate
                ? nlohmann::json{{"kind", "constant"}, {"value", {1.0, 0.0}}}
                : nlohmann::json{{"kind", "coordinate"}, {"axis", 2}}}}}}}},
      {"family", {{"name", "transport"}, {"a", a}, {"w_mode", 1}}},
      {"rho", {{"kind", "sin_power"}, {"q", 8}}},
      {"ladder", {4, 8, 16, 32}},
      {"seed", 11},
      {"output_dir", out_dir},
      {"expected", expected}};
}

nlohmann::json hdist_config(const std::string& out_dir, std::uint64_t seed) {
  return nlohmann::json{
      {"grid", {{"extent_x", {1.0}}, {"samples_x", {512}}}},
      {"anisotropy", {{"beta", {1.0}}}},
      {"family",
       {{"name", "oscillation"},
        {"k", {1}},
        {"profile", {{"kind", "sin_power"}, {"q", 2}}}}},
      {"psi", "sign_eta1"},
      {"ladder", {4, 8, 16, 32, 64}},
      {"seed", seed},
      {"output_dir", out_dir},
      {"expected", "nonzero"}};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <defectlab-binary>\n");
    return 2;
  }
  const std::string bin = argv[1];
  const fs::path work = fs::temp_directory_path() / "defectlab_cli_tests";
  fs::remove_all(work);
  fs::create_directories(work);

  // ---- check-symbol ----------------------------------------------------------
  {
    const fs::path cfg = work / "heat.json";
    nlohmann::json j = {
        {"grid",
         {{"extent_x", {1.0, 1.0}},
          {"samples_x", {16, 16}},
          {"extent_y", {1.0}},
          {"samples_y", {8}}}},
        {"anisotropy", {{"beta", {1.0, 2.0}}}},
        {"symbol",
         {{"terms",
           {{{"alpha", {1.0, 0.0}},
             {"coefficient", {{"kind", "constant"}, {"value", {1.0, 0.0}}}}},
            {{"alpha", {0.0, 2.0}},
             {"coefficient", {{"kind", "constant"}, {"value", {-1.0, 0.0}}}}}}}}},
        {"family", {{"name", "transport"}}},
        {"seed", 3}};
    write_json_file(cfg, j);
    const RunResult r = run(bin + " check-symbol --config " + cfg.string());
    check(r.exit_code == 0, "check-symbol accepts the parabolic symbol");

    // beta mismatched to the operator: dx^3 with beta = (1,2)
    nlohmann::json badj = j;
    badj["symbol"]["terms"][1]["alpha"] = {0.0, 3.0};
    const fs::path bad = work / "bad.json";
    write_json_file(bad, badj);
    const RunResult rb = run(bin + " check-symbol --config " + bad.string());
    check(rb.exit_code == 1, "invalid anisotropy exits 1");
    check(rb.output.find("invalid anisotropy") != std::string::npos,
          "invalid anisotropy is reported");
  }

  // ---- run: verdict matching -------------------------------------------------
  {
    const fs::path cfg = work / "avg_good.json";
    write_json_file(cfg, transport_config((work / "out_good").string(), false, "compact"));
    const RunResult r = run(bin + " run averaging --config " + cfg.string());
    check(r.exit_code == 0, "averaging (non-degenerate, expected compact) exits 0");
    check(fs::exists(work / "out_good" / "averaging.csv"), "averaging.csv written");
    check(fs::exists(work / "out_good" / "verdict.json"), "verdict.json written");

    const std::string csv = slurp(work / "out_good" / "averaging.csv");
    check(csv.rfind("n,", 0) == 0, "CSV starts with a header row");

    // same run but expecting the wrong verdict must exit 1
    const fs::path cfg2 = work / "avg_wrong.json";
    write_json_file(cfg2,
                    transport_config((work / "out_wrong").string(), false, "non-compact"));
    const RunResult r2 = run(bin + " run averaging --config " + cfg2.string());
    check(r2.exit_code == 1, "verdict mismatch exits 1");

    const fs::path cfg3 = work / "avg_deg.json";
    write_json_file(cfg3,
                    transport_config((work / "out_deg").string(), true, "non-compact"));
    const RunResult r3 = run(bin + " run averaging --config " + cfg3.string());
    check(r3.exit_code == 0, "averaging (degenerate, expected non-compact) exits 0");
  }

  // ---- usage errors ------------------------------------------------------------
  {
    const RunResult r = run(bin + " run no-such-experiment --config /dev/null");
    check(r.exit_code == 2, "unknown experiment exits 2");

    const fs::path broken = work / "broken.json";
    {
      std::ofstream os(broken);
      os << "{ not json";
    }
    const fs::path cfg = work / "h1.json";
    write_json_file(cfg, hdist_config((work / "h1").string(), 9));
    const RunResult r2 = run(bin + " run hdist --config " + broken.string());
    check(r2.exit_code == 2, "malformed config exits 2");

    const RunResult r3 = run(bin + " frobnicate");
    check(r3.exit_code == 2, "unknown subcommand exits 2");
  }

  // ---- determinism ----------------------------------------------------------------
  {
    const fs::path c1 = work / "h_a.json";
    const fs::path c2 = work / "h_b.json";
    write_json_file(c1, hdist_config((work / "het_a").string(), 123));
    write_json_file(c2, hdist_config((work / "het_b").string(), 123));
    const RunResult r1 = run(bin + " run hdist --config " + c1.string());
    const RunResult r2 = run(bin + " run hdist --config " + c2.string());
    check(r1.exit_code == 0 && r2.exit_code == 0, "hdist runs exit 0");
    check(slurp(work / "het_a" / "hdist.csv") == slurp(work / "het_b" / "hdist.csv"),
          "identical seed gives byte-identical CSV");
    check(slurp(work / "het_a" / "verdict.json") == slurp(work / "het_b" / "verdict.json"),
          "identical seed gives byte-identical verdict JSON");
  }

  // ---- hdist verdicts against expectations ------------------------------------------
  {
    // oscillation against sign(eta1): limit = -mass != 0 -> nonzero
    const fs::path cfg = work / "h2.json";
    write_json_file(cfg, hdist_config((work / "h2").string(), 5));
    const RunResult r = run(bin + " run hdist --config " + cfg.string());
    check(r.exit_code == 0, "hdist nonzero verdict matches expectation");
  }

  // ---- verify ------------------------------------------------------------------------
  {
    const std::string schema_dir = (fs::path(DEFECTLAB_SOURCE_DIR) / "schema").string();
    const RunResult r = run(bin + " verify --out " + (work / "v1").string() +
                            " --seed 4 --schema-dir " + schema_dir);
    check(r.exit_code == 0, "verify exits 0");
    check(fs::exists(work / "v1" / "summary.json"), "verify writes summary.json");

    const RunResult rf = run(bin + " verify --out " + (work / "v2").string() +
                             " --seed 4 --schema-dir " + schema_dir +
                             " --inject-failure");
    check(rf.exit_code == 1, "injected invariant failure exits 1");

    nlohmann::json summary;
    {
      std::ifstream is(work / "v2" / "summary.json");
      is >> summary;
    }
    check(summary["failed"].get<int>() == 1, "summary counts the injected failure");
  }

  std::printf("%s\n", failures == 0 ? "ALL CLI CHECKS PASSED" : "CLI CHECKS FAILED");
  return failures == 0 ? 0 : 1;
}
