#include "defectlab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "defectlab/multipliers.hpp"

namespace defectlab {

ScalarField velocity_average(const PhaseSpaceField& u, const ScalarField& rho) {
  const GridSpec& spec = u.spec();
  if (spec.dim_y() == 0)
    throw std::invalid_argument("velocity_average: field has no y axes");
  if (rho.spec() != spec.y_only())
    throw std::invalid_argument("velocity_average: rho grid mismatch");
  const std::size_t yt = spec.y_total();
  const double ycell = spec.y_cell_volume();
  ScalarField out(spec.x_only());
  for (std::size_t ix = 0; ix < spec.x_total(); ++ix) {
    cplx acc{0.0, 0.0};
    const std::size_t base = ix * yt;
    for (std::size_t iy = 0; iy < yt; ++iy) acc += u.values()[base + iy] * rho[iy];
    out[ix] = acc * ycell;
  }
  return out;
}

// ---- compactness ------------------------------------------------------------------

CompactnessReport compactness_diagnostic(const std::vector<ScalarField>& averages,
                                         const std::vector<int>& indices,
                                         const Region& K,
                                         std::span<const double> h_ladder,
                                         const ScalarField& phi_energy,
                                         std::span<const double> trunc_levels) {
  if (averages.size() != indices.size() || averages.size() < 4)
    throw std::invalid_argument("compactness_diagnostic: need >= 4 indexed averages");
  const GridSpec spec = averages.front().spec();
  const std::size_t m = averages.size();

  CompactnessReport rep;
  rep.indices = indices;
  rep.h_ladder.assign(h_ladder.begin(), h_ladder.end());
  rep.trunc_levels.assign(trunc_levels.begin(), trunc_levels.end());

  for (const auto& a : averages) rep.l1_norms.push_back(lp_norm(a, 1.0, K));

  rep.cauchy.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = lp_norm(averages[i] - averages[j], 1.0, K);
      rep.cauchy[i][j] = rep.cauchy[j][i] = d;
    }

  // Riesz-Kolmogorov translation moduli: worst axis per (n, h)
  rep.omega.assign(m, std::vector<double>(h_ladder.size(), 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t hi = 0; hi < h_ladder.size(); ++hi) {
      double worst = 0.0;
      for (std::size_t axis = 0; axis < spec.dim_x(); ++axis) {
        std::vector<double> h(spec.dim_x(), 0.0);
        h[axis] = h_ladder[hi];
        worst = std::max(worst, lp_norm(translate(averages[i], h) - averages[i], 1.0, K));
      }
      rep.omega[i][hi] = worst;
    }

  // truncated energies int phi^2 |T_l avg|^2
  const ScalarField phi2f = multiply(phi_energy, phi_energy);
  rep.trunc_energy.assign(m, std::vector<double>(trunc_levels.size(), 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t li = 0; li < trunc_levels.size(); ++li) {
      const ScalarField t = truncate(averages[i], trunc_levels[li]);
      double acc = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j)
        acc += phi2f[j].real() * std::norm(t[j]);
      rep.trunc_energy[i][li] = acc * spec.cell_volume();
    }

  // weak-null battery on the averages
  const std::vector<ScalarField> battery = weak_null_battery(spec, 10);
  rep.weak_null = true;
  double scale2 = 0.0;
  for (const auto& a : averages) scale2 = std::max(scale2, lp_norm(a, 2.0));
  for (const auto& g : battery) {
    std::vector<double> vals;
    for (const auto& a : averages) vals.push_back(std::abs(inner(a, g)));
    const double peak = *std::max_element(vals.begin(), vals.end());
    if (peak <= 1e-10 * scale2 * lp_norm(g, 2.0)) continue;
    if (!(tail_slope(indices, vals, 1e-300) < -0.05)) rep.weak_null = false;
  }

  rep.decay_slope = log_log_slope(indices, rep.l1_norms, 1e-300);

  // rk persistence of sup_h omega across the ladder
  std::vector<double> sup_h(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (double w : rep.omega[i]) sup_h[i] = std::max(sup_h[i], w);
  const double scale = *std::max_element(rep.l1_norms.begin(), rep.l1_norms.end());
  if (sup_h.front() > 1e-14 * std::max(scale, 1e-300)) {
    rep.rk_persistence =
        *std::min_element(sup_h.begin(), sup_h.end()) / sup_h.front();
  }

  // verdict
  const double first = rep.l1_norms.front();
  const double last = rep.l1_norms.back();
  const double least = *std::min_element(rep.l1_norms.begin(), rep.l1_norms.end());
  if (scale <= 1e-300) {
    rep.verdict = "compact";
    return rep;
  }
  const std::size_t half = m / 2;
  double top_dist = 0.0;
  for (std::size_t i = half; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) top_dist = std::max(top_dist, rep.cauchy[i][j]);

  if (last < 0.5 * first && rep.decay_slope < -0.25 && top_dist <= 0.5 * scale) {
    rep.verdict = "compact";
  } else if (least >= 0.5 * first && rep.weak_null) {
    rep.verdict = "non-compact";
  } else {
    rep.verdict = "inconclusive";
  }
  return rep;
}

// ---- weak residual -------------------------------------------------------------------

double weak_residual(const PhaseSpaceField& u, const PrincipalSymbol& P,
                     std::span<const double> kappa, const PhaseSpaceField* G,
                     std::span<const TestFunctionPair> battery) {
  const GridSpec& spec = u.spec();
  const GridSpec xspec = spec.x_only();
  const GridSpec yspec = spec.y_only();
  const double u2 = lp_norm(u, 2.0);

  // Normalization: the largest single term of the weak form (so the metric
  // reads as a cancellation defect when a test function resonates with u),
  // floored by a small multiple of the worst-case pairing scale.
  double worst = 0.0;
  for (const TestFunctionPair& g : battery) {
    if (g.x_part.spec() != xspec || g.y_part.spec() != yspec)
      throw std::invalid_argument("weak_residual: battery grid mismatch");
    cplx lhs{0.0, 0.0};
    double max_term = 0.0;
    double floor = 0.0;
    for (const SymbolTerm& term : P.terms) {
      const ScalarField dgx = apply(derivative_op(xspec, term.alpha, -1), g.x_part);
      const PhaseSpaceField gfull = tensor(dgx, g.y_part, spec);
      const cplx t = inner(multiply(term.coefficient, u), gfull);
      lhs += t;
      max_term = std::max(max_term, std::abs(t));
      const double ak_sup = lp_norm(term.coefficient, std::numeric_limits<double>::infinity());
      floor += ak_sup * u2 * lp_norm(dgx, 2.0) * lp_norm(g.y_part, 2.0);
    }
    cplx rhs{0.0, 0.0};
    if (G) {
      long total_kappa = 0;
      for (double k : kappa) total_kappa += long(std::llround(k));
      const ScalarField dgy = apply(derivative_op(yspec, kappa, +1), g.y_part);
      const PhaseSpaceField gfull = tensor(g.x_part, dgy, spec);
      rhs = (total_kappa % 2 == 0 ? 1.0 : -1.0) * inner(*G, gfull);
    }
    const double scale = max_term + std::abs(rhs) + 1e-4 * floor + 1e-300;
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

std::vector<TestFunctionPair> default_residual_battery(const GridSpec& phase_spec,
                                                       std::size_t count, Rng& rng,
                                                       int boundary_order) {
  const GridSpec xspec = phase_spec.x_only();
  const GridSpec yspec = phase_spec.y_only();
  const ScalarField wx = sin_power_window(xspec, boundary_order);
  const ScalarField wy = sin_power_window(yspec, boundary_order);

  std::vector<TestFunctionPair> out;
  for (std::size_t i = 0; i < count; ++i) {
    const ScalarField gx = multiply(wx, random_band_limited(xspec, rng, 2));
    const ScalarField gy = multiply(wy, random_band_limited(yspec, rng, 2));
    out.push_back({gx, gy});
  }
  return out;
}

ScalarField sin_power_window(const GridSpec& xspec, int q) {
  return ScalarField::sample(xspec, [&](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t a = 0; a < x.size(); ++a)
      v *= std::pow(std::sin(kPi * x[a] / xspec.extent(a)), 2.0 * q);
    return cplx{v, 0.0};
  });
}

Window tensor_bump_window(double tc, double th, double xc, double xh) {
  auto bump = [](double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; };
  auto dbump = [bump](double s) {
    if (std::abs(s) >= 1.0) return 0.0;
    const double d = 1.0 - s * s;
    return bump(s) * (-2.0 * s / (d * d));
  };
  Window w;
  w.value = [=](std::span<const double> tx) {
    return cplx{bump((tx[0] - tc) / th) * bump((tx[1] - xc) / xh), 0.0};
  };
  w.dt = [=](std::span<const double> tx) {
    return cplx{dbump((tx[0] - tc) / th) / th * bump((tx[1] - xc) / xh), 0.0};
  };
  w.dx = [=](std::span<const double> tx) {
    return cplx{bump((tx[0] - tc) / th) * dbump((tx[1] - xc) / xh) / xh, 0.0};
  };
  return w;
}

// ---- combined experiment -----------------------------------------------------------------

AveragingExperimentReport run_averaging_experiment(const AveragingExperimentInput& in) {
  AveragingExperimentReport rep;
  Rng rng(in.seed);

  rep.degeneracy = degeneracy_scan(in.symbol);

  // weak residual on the first few indices
  const std::size_t nres = std::min(in.residual_indices, in.family.indices.size());
  const GridSpec phase_spec = in.family(in.family.indices.front()).spec();
  const auto battery =
      default_residual_battery(phase_spec, in.residual_battery_size, rng);
  for (std::size_t i = 0; i < nres; ++i) {
    const int n = in.family.indices[i];
    const PhaseSpaceField u = in.family(n);
    const PhaseSpaceField g = in.source(n);
    const bool has_source = in.windowed;
    rep.residual = std::max(
        rep.residual, weak_residual(u, in.symbol, in.kappa,
                                    has_source ? &g : nullptr, battery));
  }

  // velocity averages across the ladder
  std::vector<ScalarField> averages;
  for (int n : in.family.indices)
    averages.push_back(velocity_average(in.family(n), in.rho));

  // v-side family for the localization test: the averages themselves
  ScalarFamily fam_v;
  fam_v.label = "velocity_averages";
  fam_v.p_bound = 2.0;
  fam_v.indices = in.family.indices;
  {
    std::vector<int> idx = in.family.indices;
    auto avg_copy = averages;
    fam_v.generator = [idx = std::move(idx), avg = std::move(avg_copy)](int n) {
      for (std::size_t i = 0; i < idx.size(); ++i)
        if (idx[i] == n) return avg[i];
      throw std::invalid_argument("averages family: index outside ladder");
    };
  }

  rep.localization = localization_residual(in.symbol, in.family, fam_v, in.phi1,
                                           in.phi2, in.psi, 1.0,
                                           in.windowed ? &in.source : nullptr);
  if (in.windowed) rep.source_norms = rep.localization.source_norms;

  rep.compactness =
      compactness_diagnostic(averages, in.family.indices, in.K, in.h_ladder,
                             in.phi_energy, in.trunc_levels);
  rep.verdict = rep.compactness.verdict;
  return rep;
}

}  // namespace defectlab
