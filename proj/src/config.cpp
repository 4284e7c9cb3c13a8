#include "defectlab/config.hpp"

#include <fstream>
#include <stdexcept>

#include "defectlab/averaging.hpp"
#include "defectlab/defect.hpp"
#include "defectlab/expressions.hpp"

namespace defectlab {

ExperimentConfig parse_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.raw = j;

  const auto& g = j.at("grid");
  std::vector<double> ex = g.at("extent_x").get<std::vector<double>>();
  std::vector<std::size_t> nx = g.at("samples_x").get<std::vector<std::size_t>>();
  std::vector<double> ey;
  std::vector<std::size_t> ny;
  if (g.contains("extent_y")) {
    ey = g.at("extent_y").get<std::vector<double>>();
    ny = g.at("samples_y").get<std::vector<std::size_t>>();
  }
  cfg.grid = GridSpec::phase_grid(std::move(ex), std::move(nx), std::move(ey),
                                  std::move(ny));

  cfg.aniso = Anisotropy::make(j.at("anisotropy").at("beta").get<std::vector<double>>());
  if (cfg.aniso.dim() != cfg.grid.dim_x())
    throw std::invalid_argument("config: beta rank must match the x axes");

  cfg.ladder = j.value("ladder", std::vector<int>{4, 8, 16, 32, 64});
  if (cfg.ladder.empty()) throw std::invalid_argument("config: empty ladder");
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.expected = j.value("expected", std::string());
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  is >> j;
  return parse_config(j);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) { return cfg.raw; }

PhaseSpaceField coefficient_from_json(const nlohmann::json& j, const GridSpec& grid) {
  if (j.contains("file")) {
    PhaseSpaceField f = read_phase_field(j.at("file").get<std::string>());
    if (f.spec() != grid)
      throw std::invalid_argument("config: sampled coefficient grid mismatch");
    return f;
  }
  return sample_expression_phase(grid, j);
}

PrincipalSymbol build_symbol(const ExperimentConfig& cfg) {
  const auto& sym = cfg.raw.at("symbol");
  std::vector<SymbolTerm> terms;
  for (const auto& t : sym.at("terms")) {
    SymbolTerm term;
    term.alpha = t.at("alpha").get<std::vector<double>>();
    term.coefficient = coefficient_from_json(t.at("coefficient"), cfg.grid);
    terms.push_back(std::move(term));
  }
  return make_principal_symbol(std::move(terms), cfg.aniso);
}

namespace {

ScalarField default_profile(const GridSpec& xspec, const nlohmann::json& fam,
                            const char* key) {
  if (fam.contains(key)) return sample_expression(xspec, fam.at(key));
  nlohmann::json def = {{"kind", "sin_power"}, {"q", 4}};
  return sample_expression(xspec, def);
}

}  // namespace

BuiltFamily build_family(const ExperimentConfig& cfg) {
  const auto& fam = cfg.raw.at("family");
  const std::string name = fam.at("name").get<std::string>();
  BuiltFamily out;
  out.has_y = cfg.grid.dim_y() > 0;

  if (name == "oscillation") {
    const GridSpec xspec = cfg.grid.x_only();
    const std::vector<long> k = fam.at("k").get<std::vector<long>>();
    const ScalarField profile = default_profile(xspec, fam, "profile");
    out.v = oscillation(k, profile, cfg.ladder);
    out.u = as_phase(out.v);
    out.source.indices = cfg.ladder;
    out.source.generator = [spec = cfg.grid](int) { return PhaseSpaceField(spec.x_only()); };
    return out;
  }

  if (name == "concentration") {
    const GridSpec xspec = cfg.grid.x_only();
    const double p = fam.value("p", 2.0);
    const double radius = fam.value("support_radius", 1.0);
    std::vector<double> center =
        fam.value("center", std::vector<double>(xspec.dim_x(), 0.0));
    const std::string prof = fam.value("profile_kind", std::string("step"));
    FieldFn profile;
    if (prof == "step") {
      profile = [](std::span<const double> s) {
        for (double v : s)
          if (v < 0.0 || v >= 1.0) return cplx{0.0, 0.0};
        return cplx{1.0, 0.0};
      };
    } else if (prof == "bump") {
      profile = [](std::span<const double> s) {
        double v = 1.0;
        for (double c : s) v *= bump_profile(c);
        return cplx{v, 0.0};
      };
    } else {
      throw std::invalid_argument("config: unknown concentration profile kind");
    }
    out.v = concentration(xspec, profile, radius, center, p, cfg.ladder);
    out.v.p_bound = p;
    out.u = as_phase(out.v);
    out.source.indices = cfg.ladder;
    out.source.generator = [spec = xspec](int) { return PhaseSpaceField(spec); };
    return out;
  }

  if (name == "transport") {
    if (cfg.grid.dim_x() != 2 || cfg.grid.dim_y() == 0)
      throw std::invalid_argument("config: transport family needs (t,x) + y axes");
    const GridSpec yspec = cfg.grid.y_only();
    ScalarField a(yspec);
    if (fam.contains("a")) {
      // coefficient over y; coordinate axes refer to the y block
      a = sample_expression(yspec, fam.at("a"));
    } else {
      a = ScalarField(yspec, std::vector<cplx>(yspec.total(), cplx{1.0, 0.0}));
    }
    const long mode = fam.value("w_mode", 1L);
    auto w = [mode](double s) { return std::polar(1.0, kTwoPi * double(mode) * s); };

    std::optional<Window> window;
    if (fam.value("windowed", false)) {
      const auto& wj = fam.value("window", nlohmann::json::object());
      window = tensor_bump_window(
          wj.value("t_center", 0.5 * cfg.grid.extent(0)),
          wj.value("t_halfwidth", 0.35 * cfg.grid.extent(0)),
          wj.value("x_center", 0.5 * cfg.grid.extent(1)),
          wj.value("x_halfwidth", 0.35 * cfg.grid.extent(1)));
    }
    std::optional<ScalarField> ywin;
    if (fam.contains("y_window")) ywin = sample_expression(yspec, fam.at("y_window"));

    TransportFamily tf = transport_wave(cfg.grid, a, w, std::labs(mode), window, ywin,
                                        cfg.ladder);
    out.u = tf.family;
    out.source = tf.source;
    out.windowed = tf.windowed;

    // v-side: velocity averages of the family
    ScalarField rho(yspec);
    if (cfg.raw.contains("rho")) {
      rho = sample_expression(yspec, cfg.raw.at("rho"));
    } else {
      nlohmann::json def = {{"kind", "sin_power"}, {"q", 8}};
      rho = sample_expression(yspec, def);
    }
    out.v.label = "velocity_averages";
    out.v.p_bound = 2.0;
    out.v.indices = cfg.ladder;
    out.v.generator = [gen = tf.family.generator, rho](int n) {
      return velocity_average(gen(n), rho);
    };
    return out;
  }

  throw std::invalid_argument("config: unknown family '" + name + "'");
}

}  // namespace defectlab
