#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "defectlab/config.hpp"
#include "defectlab/expressions.hpp"
#include "defectlab/report.hpp"
#include "support.hpp"

using namespace defectlab;
using namespace testsupport;
namespace fs = std::filesystem;

#ifndef DEFECTLAB_SOURCE_DIR
#define DEFECTLAB_SOURCE_DIR "."
#endif

namespace {

nlohmann::json sample_config() {
  return nlohmann::json{
      {"grid",
       {{"extent_x", {1.0, 1.0}},
        {"samples_x", {16, 32}},
        {"extent_y", {1.0}},
        {"samples_y", {8}}}},
      {"anisotropy", {{"beta", {1.0, 1.0}}}},
      {"symbol",
       {{"terms",
         {{{"alpha", {1.0, 0.0}}, {"coefficient", {{"kind", "constant"}, {"value", {1.0, 0.0}}}}},
          {{"alpha", {0.0, 1.0}},
           {"coefficient", {{"kind", "coordinate"}, {"axis", 2}}}}}}}},
      {"family", {{"name", "transport"}, {"a", {{"kind", "coordinate"}, {"axis", 0}}}}},
      {"ladder", {4, 8}},
      {"seed", 42},
      {"output_dir", "/tmp/defectlab_cfg_test"},
      {"expected", "compact"}};
}

}  // namespace

TEST_CASE("config parses and round-trips losslessly") {
  const nlohmann::json j = sample_config();
  const ExperimentConfig cfg = parse_config(j);
  CHECK(cfg.grid.dim_x() == 2);
  CHECK(cfg.grid.dim_y() == 1);
  CHECK(cfg.aniso.ell == 2);
  CHECK(cfg.ladder == std::vector<int>{4, 8});
  CHECK(cfg.seed == 42);
  CHECK(cfg.expected == "compact");

  // round trip: parse(dump(parse(j))) reproduces the document byte-for-byte
  const nlohmann::json echoed = config_to_json(cfg);
  const ExperimentConfig cfg2 = parse_config(nlohmann::json::parse(echoed.dump()));
  CHECK(config_to_json(cfg2).dump() == j.dump());
}

TEST_CASE("config errors are rejected") {
  nlohmann::json j = sample_config();
  j.erase("grid");
  CHECK_THROWS(parse_config(j));

  nlohmann::json j2 = sample_config();
  j2["anisotropy"]["beta"] = {1.0};  // rank mismatch with 2 x axes
  CHECK_THROWS_AS(parse_config(j2), std::invalid_argument);

  nlohmann::json j3 = sample_config();
  j3["family"]["name"] = "no-such-family";
  CHECK_THROWS_AS(build_family(parse_config(j3)), std::invalid_argument);
}

TEST_CASE("expression whitelist evaluates its closed forms") {
  const GridSpec xspec = GridSpec::x_grid({2.0}, {8});

  const ScalarField c = sample_expression(
      xspec, nlohmann::json{{"kind", "constant"}, {"value", {1.5, -0.5}}});
  CHECK(c[3] == cplx{1.5, -0.5});

  const ScalarField coord = sample_expression(
      xspec, nlohmann::json{{"kind", "coordinate"}, {"axis", 0}});
  CHECK(coord[3] == cplx{0.75, 0.0});  // 3 * (2/8)

  const ScalarField poly = sample_expression(
      xspec, nlohmann::json{{"kind", "polynomial"}, {"axis", 0}, {"coeffs", {1.0, 2.0, 1.0}}});
  CHECK(poly[2].real() == doctest::Approx(1.0 + 2.0 * 0.5 + 0.25));

  const ScalarField trig = sample_expression(
      xspec, nlohmann::json{{"kind", "trig"},
                            {"modes", {{{"k", {1.0}}, {"amp", {1.0, 0.0}}}}}});
  CHECK(std::abs(trig[1] - std::polar(1.0, kTwoPi * 0.125)) < 1e-14);

  const ScalarField bump = sample_expression(
      xspec, nlohmann::json{{"kind", "bump"},
                            {"center", {1.0}},
                            {"halfwidth", {0.5}},
                            {"amplitude", 2.0}});
  CHECK(bump[4].real() == doctest::Approx(2.0));  // center
  CHECK(bump[0].real() == 0.0);                   // outside the support

  CHECK_THROWS_AS(sample_expression(xspec, nlohmann::json{{"kind", "mystery"}}),
                  std::invalid_argument);
}

TEST_CASE("field files round trip exactly") {
  const fs::path dir = fs::temp_directory_path() / "defectlab_field_io";
  fs::create_directories(dir);
  const std::string path = (dir / "f.bin").string();

  const GridSpec spec = GridSpec::phase_grid({1.0, 2.0}, {4, 8}, {3.0}, {6});
  Rng rng(77);
  std::vector<cplx> vals(spec.total());
  for (auto& v : vals) v = rng.cnormal();
  write_field_file(path, PhaseSpaceField(spec, vals));

  const PhaseSpaceField back = read_phase_field(path);
  CHECK(back.spec() == spec);
  CHECK(max_abs_diff(back.values(), vals) == 0.0);

  // header layout is as documented: u32 dims, f64 extents, u64 counts
  std::ifstream is(path, std::ios::binary);
  std::uint32_t dx = 0, dy = 0;
  is.read(reinterpret_cast<char*>(&dx), 4);
  is.read(reinterpret_cast<char*>(&dy), 4);
  CHECK(dx == 2);
  CHECK(dy == 1);
  double ext[3];
  is.read(reinterpret_cast<char*>(ext), 24);
  CHECK(ext[0] == 1.0);
  CHECK(ext[2] == 3.0);

  // scalar reader refuses a phase-space file
  CHECK_THROWS(read_scalar_field(path));

  const GridSpec xonly = GridSpec::x_grid({1.0}, {8});
  const std::string spath = (dir / "s.bin").string();
  std::vector<cplx> svals(8, cplx{1.0, 2.0});
  write_field_file(spath, ScalarField(xonly, svals));
  CHECK(max_abs_diff(read_scalar_field(spath).values(), svals) == 0.0);
}

TEST_CASE("coefficients can come from sampled-field files") {
  const fs::path dir = fs::temp_directory_path() / "defectlab_coeff_io";
  fs::create_directories(dir);
  const std::string path = (dir / "a.bin").string();

  const nlohmann::json base = sample_config();
  const ExperimentConfig cfg = parse_config(base);
  PhaseSpaceField coeff(cfg.grid);
  for (std::size_t i = 0; i < coeff.size(); ++i) coeff[i] = cplx{double(i), 0.0};
  write_field_file(path, coeff);

  const PhaseSpaceField loaded =
      coefficient_from_json(nlohmann::json{{"file", path}}, cfg.grid);
  CHECK(max_abs_diff(loaded.values(), coeff.values()) == 0.0);
}

TEST_CASE("built families honor the config") {
  const ExperimentConfig cfg = parse_config(sample_config());
  const BuiltFamily fam = build_family(cfg);
  CHECK(fam.has_y);
  CHECK(!fam.windowed);
  const PhaseSpaceField u = fam.u(4);
  CHECK(u.spec() == cfg.grid);
  CHECK(u.all_finite());
  const ScalarField v = fam.v(4);  // velocity averages
  CHECK(v.spec() == cfg.grid.x_only());
}

TEST_CASE("shipped schemas validate the artifacts and reject garbage") {
  const fs::path schema_dir = fs::path(DEFECTLAB_SOURCE_DIR) / "schema";
  REQUIRE(fs::exists(schema_dir / "verdict.schema.json"));

  nlohmann::json verdict_schema, config_schema, summary_schema;
  {
    std::ifstream is(schema_dir / "verdict.schema.json");
    is >> verdict_schema;
  }
  {
    std::ifstream is(schema_dir / "config.schema.json");
    is >> config_schema;
  }
  {
    std::ifstream is(schema_dir / "summary.schema.json");
    is >> summary_schema;
  }

  const nlohmann::json verdict = {{"limit_re", 0.1},
                                  {"limit_im", 0.0},
                                  {"fit_residual", 1e-4},
                                  {"verdict", "nonzero"}};
  CHECK(validate_against_schema(verdict, verdict_schema).empty());
  CHECK(!validate_against_schema(nlohmann::json{{"verdict", "zero"}}, verdict_schema).empty());
  CHECK(!validate_against_schema(nlohmann::json{{"limit_re", 0.0},
                                                {"limit_im", 0.0},
                                                {"fit_residual", 0.0},
                                                {"verdict", "maybe"}},
                                 verdict_schema)
             .empty());

  CHECK(validate_against_schema(sample_config(), config_schema).empty());
  const nlohmann::json summary = {
      {"passed", 3},
      {"failed", 0},
      {"skipped", 1},
      {"results", {{{"name", "x"}, {"status", "pass"}, {"detail", ""}}}}};
  CHECK(validate_against_schema(summary, summary_schema).empty());
}

TEST_CASE("CSV writer emits RFC 4180") {
  CsvWriter csv({"n", "text"});
  csv.add_row({"1", "plain"});
  csv.add_row({"2", "with,comma"});
  csv.add_row({"3", "with\"quote"});
  const std::string out = csv.str();
  CHECK(out ==
        "n,text\r\n1,plain\r\n2,\"with,comma\"\r\n3,\"with\"\"quote\"\r\n");
}
