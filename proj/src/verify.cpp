#include "defectlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "defectlab/averaging.hpp"
#include "defectlab/defect.hpp"
#include "defectlab/expressions.hpp"
#include "defectlab/parallel.hpp"
#include "defectlab/report.hpp"

namespace defectlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.str().empty()) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (!detail.str().empty()) detail << "; ";
    detail << what;
  }
};

double rel_err(double a, double b) {
  const double d = std::max(std::abs(a), std::abs(b));
  return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

double rel_err(cplx a, cplx b) {
  const double d = std::max(std::abs(a), std::abs(b));
  return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

double max_rel_diff(const ScalarField& a, const ScalarField& b) {
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i]));
  if (scale == 0.0) scale = 1.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  return worst;
}

// ---- shared builders ----------------------------------------------------------

ScalarFamily cos_oscillation(const GridSpec& xspec, long k, const ScalarField& profile,
                             std::vector<int> ladder) {
  ScalarFamily fam;
  fam.label = "cos_oscillation";
  fam.p_bound = 2.0;
  fam.indices = std::move(ladder);
  fam.generator = [xspec, k, profile](int n) {
    ScalarField out(xspec);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double x = xspec.coord(0, i);
      out[i] = std::cos(kTwoPi * double(n) * double(k) * x / xspec.extent(0)) * profile[i];
    }
    return out;
  };
  return fam;
}

// 2D oscillation e^{2 pi i n k.x/L} chi(x) as matched (u, v) pair
struct OraclePair {
  PhaseFamily u;
  ScalarFamily v;
  ScalarField chi;
};

OraclePair plane_oscillation_pair(const GridSpec& xspec, std::vector<long> k,
                                  int chi_q, std::vector<int> ladder) {
  OraclePair pair;
  pair.chi = sin_power_window(xspec, chi_q);
  pair.v = oscillation(k, pair.chi, ladder);
  pair.u = as_phase(pair.v);
  return pair;
}

PrincipalSymbol constant_coefficient_symbol(const GridSpec& grid,
                                            const Anisotropy& aniso,
                                            std::vector<std::vector<double>> alphas,
                                            std::vector<cplx> coefficients) {
  std::vector<SymbolTerm> terms;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    SymbolTerm t;
    t.alpha = alphas[i];
    t.coefficient =
        PhaseSpaceField(grid, std::vector<cplx>(grid.total(), coefficients[i]));
    terms.push_back(std::move(t));
  }
  return make_principal_symbol(std::move(terms), aniso);
}

// u_n = v_n = e^{2 pi i n (k_t t + k_x x)/L} chi ⊗ 1(y): the mismatched
// negative control of the localization tests; used in several invariants.
struct LocalizationSetup {
  PhaseFamily u;
  ScalarFamily v;
  PhaseSpaceField phi1;
  ScalarField phi2;
  GridSpec grid;
};

LocalizationSetup oscillation_localization_setup(std::vector<int> ladder) {
  const GridSpec grid =
      GridSpec::phase_grid({1.0, 1.0}, {128, 128}, {1.0}, {8});
  LocalizationSetup s;
  s.grid = grid;
  const GridSpec xspec = grid.x_only();
  const ScalarField chi = sin_power_window(xspec, 2);
  s.v = oscillation({-1, 1}, chi, ladder);
  const auto vgen = s.v.generator;
  s.u.label = "plane_wave_phase";
  s.u.p_bound = 2.0;
  s.u.indices = std::move(ladder);
  s.u.generator = [grid, vgen](int n) { return broadcast_x(vgen(n), grid); };
  s.phi1 = broadcast_x(sin_power_window(xspec, 1), grid);
  s.phi2 = sin_power_window(xspec, 1);
  return s;
}

// analytic oracle for the oscillation localization residual: the assembled
// multiplier tables are 0-homogeneous, so at direction kappa the limit is
// sum_k conj(M_k(eta)) * int a_k phi1 phi2bar |chi|^2
cplx localization_analytic_value(const PrincipalSymbol& A,
                                 const LocalizationSetup& s,
                                 const SymbolOnManifold& psi,
                                 std::span<const double> kappa) {
  const auto eta = project(kappa, A.aniso);
  // |chi|^2 is n-independent; evaluate it from the first ladder entry
  const ScalarField vv = s.v(s.v.indices.front());
  const ScalarField xfactor = multiply(conjugate(s.phi2), multiply(vv, conjugate(vv)));
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < A.terms.size(); ++k) {
    if (A.homogeneity_defect(k) > 1e-12) continue;  // T^{defect} kills these in the limit
    cplx mk = psi.eval(eta);
    for (std::size_t j = 0; j < eta.size(); ++j)
      mk *= imag_power(eta[j], A.terms[k].alpha[j], -1);
    const PhaseSpaceField integrand =
        multiply(A.terms[k].coefficient,
                 multiply(s.phi1, broadcast_x(xfactor, s.grid)));
    acc += std::conj(mk) * integrate(integrand);
  }
  return acc;
}

}  // namespace

VerifySummary run_verification(std::uint64_t seed, const std::string& out_dir,
                               const std::string& schema_dir, bool inject_failure) {
  using Fn = std::function<void(Check&, Rng&)>;
  std::vector<std::pair<std::string, Fn>> battery;

  // ---- grid ---------------------------------------------------------------

  battery.emplace_back("grid.roundtrip_plancherel", [](Check& c, Rng& rng) {
    for (const GridSpec& spec :
         {GridSpec::x_grid({1.0}, {256}), GridSpec::x_grid({1.0, 2.0}, {256, 256})}) {
      ScalarField f = random_band_limited(spec, rng, 12);
      const SpectralField F = forward_transform(f);
      const ScalarField g = inverse_transform(F);
      c.require(max_rel_diff(f, g) < 1e-12, "round trip above 1e-12");
      c.require(rel_err(lp_norm(f, 2.0), F.l2_norm()) < 1e-12, "Plancherel above 1e-12");
    }
  });

  battery.emplace_back("grid.norm_homogeneity_triangle", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({2.0}, {64});
    for (int t = 0; t < 20; ++t) {
      const ScalarField f = random_band_limited(spec, rng, 8);
      const ScalarField g = random_band_limited(spec, rng, 8);
      const cplx s = rng.cnormal();
      for (double p : {1.0, 2.0, 3.5, kInf}) {
        c.require(rel_err(lp_norm(s * f, p), std::abs(s) * lp_norm(f, p)) < 1e-12,
                  "norm not 1-homogeneous");
        c.require(lp_norm(f + g, p) <= lp_norm(f, p) + lp_norm(g, p) + 1e-12,
                  "triangle inequality fails");
      }
    }
  });

  battery.emplace_back("grid.translate_composition", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0}, {128});
    const ScalarField f = random_band_limited(spec, rng, 10);
    const std::vector<double> h1{0.137}, h2{0.291}, h12{0.137 + 0.291};
    const ScalarField a = translate(translate(f, h1), h2);
    const ScalarField b = translate(f, h12);
    c.require(max_rel_diff(a, b) < 1e-12, "translate does not compose additively");
    const std::vector<double> period{1.0};
    c.require(max_rel_diff(translate(f, period), f) < 1e-12,
              "full-period translate is not the identity");
  });

  // ---- anisotropy / symbols -------------------------------------------------

  battery.emplace_back("symbols.projection_geometry", [](Check& c, Rng& rng) {
    for (const auto& beta :
         {std::vector<double>{1, 1}, std::vector<double>{1, 2}, std::vector<double>{2, 3}}) {
      const Anisotropy aniso = Anisotropy::make(beta);
      for (int t = 0; t < 2000; ++t) {
        std::vector<double> xi{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        if (std::abs(xi[0]) + std::abs(xi[1]) < 1e-3) continue;
        const auto eta = project(xi, aniso);
        double s = 0.0;
        for (std::size_t i = 0; i < 2; ++i)
          s += std::pow(std::abs(eta[i]), double(aniso.ell) * beta[i]);
        c.require(std::abs(s - 1.0) < 1e-12, "projection off the manifold");
        const auto eta2 = project(eta, aniso);
        c.require(std::abs(eta2[0] - eta[0]) < 1e-12 && std::abs(eta2[1] - eta[1]) < 1e-12,
                  "projection not idempotent");
        const double lam = std::pow(10.0, rng.uniform(-3, 3));
        const auto etad = project(dilate(xi, lam, aniso), aniso);
        c.require(std::abs(etad[0] - eta[0]) < 1e-12 && std::abs(etad[1] - eta[1]) < 1e-12,
                  "projection not dilation invariant");
        c.require(rel_err(quasi_norm(dilate(xi, lam, aniso), aniso),
                          lam * quasi_norm(xi, aniso)) < 1e-12,
                  "quasi-norm not 1-homogeneous under dilation");
      }
    }
  });

  battery.emplace_back("symbols.principal_homogeneity", [](Check& c, Rng& rng) {
    const GridSpec grid = GridSpec::phase_grid({1.0, 1.0}, {4, 4}, {1.0}, {4});
    // heat: dt - dxx with beta = (1,2); transport: dt + dx with beta = (1,1)
    const PrincipalSymbol heat = constant_coefficient_symbol(
        grid, Anisotropy::make({1, 2}), {{1, 0}, {0, 2}}, {{1, 0}, {-1, 0}});
    const PrincipalSymbol transport = constant_coefficient_symbol(
        grid, Anisotropy::make({1, 1}), {{1, 0}, {0, 1}}, {{1, 0}, {1, 0}});
    for (const PrincipalSymbol* A : {&heat, &transport}) {
      for (int t = 0; t < 500; ++t) {
        std::vector<double> xi{rng.uniform(-4, 4), rng.uniform(-4, 4)};
        if (quasi_norm(xi, A->aniso) < 1e-3) continue;
        const double lam = std::pow(10.0, rng.uniform(-1, 1));
        const cplx a0 = evaluate_principal(*A, 0, 0, xi);
        const cplx a1 = evaluate_principal(*A, 0, 0, dilate(xi, lam, A->aniso));
        c.require(rel_err(a1, lam * a0) < 1e-12, "gen_homog identity fails");
      }
    }
    // spot values: heat at (0,1) -> 4 pi^2; transport at (1,1) with a=2 -> 2 pi i * 3
    const cplx heat_val = evaluate_principal(heat, 0, 0, std::vector<double>{0.0, 1.0});
    c.require(rel_err(heat_val, cplx{4.0 * kPi * kPi, 0.0}) < 1e-12, "heat symbol value");
  });

  battery.emplace_back("symbols.marcinkiewicz_smoothing", [](Check& c, Rng&) {
    for (const auto& beta : {std::vector<double>{1, 1}, std::vector<double>{1, 2}}) {
      const Anisotropy aniso = Anisotropy::make(beta);
      for (double gamma : {0.5, 1.0, 2.0}) {
        auto tg = [&aniso, gamma](std::span<const double> xi) {
          const double guard = 1.0 - cutoff_theta(xi, aniso);
          if (guard == 0.0) return cplx{0.0, 0.0};
          return cplx{guard * std::pow(quasi_norm(xi, aniso), -gamma), 0.0};
        };
        const MarcinkiewiczReport rep = marcinkiewicz_sup(tg, aniso);
        c.require(rep.certified, "T^gamma symbol failed certification");
        c.require(std::isfinite(rep.sup_fine), "T^gamma sup not finite");
      }
    }
  });

  battery.emplace_back("symbols.marcinkiewicz_negative_control", [](Check& c, Rng&) {
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});
    auto bad = [](std::span<const double> xi) {
      return cplx{std::log(std::abs(xi[0])), 0.0};
    };
    const MarcinkiewiczReport rep = marcinkiewicz_sup(bad, aniso);
    c.require(!rep.certified, "log|xi_1| must fail certification");
    // a smooth 0-homogeneous symbol stays certified
    auto good = [](std::span<const double> xi) {
      const double r = std::hypot(xi[0], xi[1]);
      return cplx{xi[0] / r, 0.0};
    };
    c.require(marcinkiewicz_sup(good, aniso).certified, "xi1/|xi| must certify");
  });

  battery.emplace_back("symbols.delta_regularizer", [](Check& c, Rng&) {
    const GridSpec grid = GridSpec::phase_grid({1.0, 1.0}, {4, 4}, {1.0}, {8});
    const PrincipalSymbol heat = constant_coefficient_symbol(
        grid, Anisotropy::make({1, 2}), {{1, 0}, {0, 2}}, {{1, 0}, {-1, 0}});
    const double g1 = delta_regularizer_gap(heat, 1e-4);
    const double g2 = delta_regularizer_gap(heat, 5e-5);
    c.require(g1 < 1e-4, "heat gap should be tiny (min |A| ~ 2 pi)");
    c.require(std::abs(g2 / g1 - 0.5) < 0.05, "gap should halve with delta");
    const PrincipalSymbol degenerate = constant_coefficient_symbol(
        grid, Anisotropy::make({1, 1}), {{1, 0}, {0, 1}}, {{1, 0}, {1, 0}});
    // sample set containing the zero direction tau = -xi
    const std::vector<std::vector<double>> dirs{{-1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}};
    c.require(std::abs(delta_regularizer_gap_at(degenerate, 1e-6, dirs) - 1.0) < 1e-9,
              "degenerate symbol gap must equal 1");
  });

  // ---- multipliers -----------------------------------------------------------

  battery.emplace_back("multipliers.eigenfunction_commute", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {16, 16});
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});
    const SymbolOnManifold psi = named_symbol("eta1", aniso);
    const MultiplierOp op = symbol_op(psi, aniso, spec);
    // plane wave at k = (3, -2) is an eigenfunction with eigenvalue table[k]
    ScalarField wave = ScalarField::sample(spec, [&](std::span<const double> x) {
      return std::polar(1.0, kTwoPi * (3.0 * x[0] - 2.0 * x[1]));
    });
    const ScalarField out = apply(op, wave);
    const std::vector<long> kvec{3, -2};
    SpectralField table(spec, op.table);
    const cplx ev = table.at(kvec);
    c.require(max_rel_diff(out, ev * wave) < 1e-12, "plane wave not an eigenfunction");

    const MultiplierOp op2 = derivative_op(spec, std::vector<double>{1.0, 0.0});
    const ScalarField f = random_band_limited(spec, rng, 5);
    const ScalarField ab = apply(op, apply(op2, f));
    const ScalarField ba = apply(op2, apply(op, f));
    c.require(max_rel_diff(ab, ba) < 1e-12, "multipliers do not commute");

    const ScalarField g = random_band_limited(spec, rng, 5);
    const cplx a = rng.cnormal(), b = rng.cnormal();
    const ScalarField lin = apply(op, a * f + b * g);
    const ScalarField lin2 = a * apply(op, f) + b * apply(op, g);
    c.require(max_rel_diff(lin, lin2) < 1e-12, "application not linear");
  });

  battery.emplace_back("multipliers.derivative_composition", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0}, {128});
    ScalarField f = random_band_limited(spec, rng, 16, /*zero_mean=*/true);
    const std::vector<double> a1{1.0}, a2{2.0}, ah{0.5};
    const ScalarField d2 = fractional_derivative(f, a2);
    const ScalarField d11 = fractional_derivative(fractional_derivative(f, a1), a1);
    c.require(max_rel_diff(d2, d11) < 1e-10, "d^2 != d(d f)");
    const ScalarField dhh = fractional_derivative(fractional_derivative(f, ah), ah);
    const ScalarField d1 = fractional_derivative(f, a1);
    c.require(max_rel_diff(dhh, d1) < 1e-10, "half-derivative twice != derivative");
  });

  battery.emplace_back("multipliers.chain_identity", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {64, 64});
    const Anisotropy aniso = Anisotropy::make({1.0, 2.0});
    for (double gamma : {0.5, 1.0}) {
      for (std::size_t j = 0; j < 2; ++j) {
        std::vector<double> alpha(2, 0.0);
        alpha[j] = gamma * aniso.beta[j];
        const MultiplierOp path2 =
            projected_power_op(spec, aniso, alpha, +1, 0.0, nullptr);
        for (int t = 0; t < 5; ++t) {
          const ScalarField f = random_band_limited(spec, rng, 12);
          const ScalarField p1 = fractional_derivative(smoothing_T(f, gamma, aniso), alpha);
          const ScalarField p2 = apply(path2, f);
          c.require(max_rel_diff(p1, p2) < 1e-10, "two-path chain identity fails");
        }
      }
    }
  });

  battery.emplace_back("multipliers.smoothing_bounded", [](Check& c, Rng& rng) {
    const Anisotropy aniso = Anisotropy::make({1.0, 2.0});
    std::vector<double> worst_ratio;
    for (std::size_t N : {32, 64}) {
      const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {N, N});
      double worst = 0.0;
      for (double p : {1.5, 2.0, 3.0}) {
        for (int t = 0; t < 10; ++t) {
          const ScalarField f = random_high_pass(spec, rng, aniso, 2.0, long(N) / 4);
          const double num = sobolev_norm(smoothing_T(f, 1.0, aniso), 1.0, aniso, p);
          const double den = lp_norm(f, p);
          if (den > 0) worst = std::max(worst, num / den);
        }
      }
      worst_ratio.push_back(worst);
    }
    c.note("ratios " + fmt_double(worst_ratio[0]) + " " + fmt_double(worst_ratio[1]));
    c.require(worst_ratio[1] <= 1.2 * worst_ratio[0] &&
                  worst_ratio[0] <= 1.2 * worst_ratio[1],
              "T^1 boundedness constant not grid-stable");
  });

  battery.emplace_back("multipliers.lp_quasi_boundedness", [](Check& c, Rng& rng) {
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});
    const SymbolOnManifold psi = named_symbol("eta1", aniso);
    double prev_worst = 0.0;
    for (std::size_t N : {32, 64}) {
      const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {N, N});
      const MultiplierOp op = symbol_op(psi, aniso, spec);
      double worst = 0.0;
      for (double p : {1.5, 2.0, 4.0}) {
        for (int t = 0; t < 30; ++t) {
          const ScalarField f = random_band_limited(spec, rng, long(N) / 4);
          const double den = lp_norm(f, p);
          if (den > 0) worst = std::max(worst, lp_norm(apply(op, f), p) / den);
        }
      }
      c.require(worst < 25.0, "L^p ratio exceeds the pinned constant");
      if (prev_worst > 0)
        c.require(worst <= 1.3 * prev_worst && prev_worst <= 1.3 * worst,
                  "L^p ratio not grid-stable");
      prev_worst = worst;
    }
  });

  // ---- sequences ---------------------------------------------------------------

  battery.emplace_back("sequences.family_checks", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0}, {512});
    const ScalarFamily osc = oscillation({1}, sin_power_window(spec, 2));
    const FamilyCheck oc = check_family(osc);
    c.require(oc.bounded, "oscillation family norms drift");
    c.require(oc.weak_null, "oscillation family fails the weak-null battery");

    auto step = [](std::span<const double> s) {
      return (s[0] >= 0.0 && s[0] < 1.0) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    };
    const GridSpec cspec = GridSpec::x_grid({1.0}, {1024});
    const ScalarFamily conc = concentration(cspec, step, 1.0, {0.0}, 2.0);
    const FamilyCheck cc = check_family(conc);
    c.require(cc.norm_drift < 1e-12, "concentration norms not exactly constant");
    c.require(cc.weak_null, "concentration family fails the weak-null battery");
  });

  battery.emplace_back("sequences.truncate_band", [](Check& c, Rng& rng) {
    const GridSpec spec = GridSpec::x_grid({1.0}, {64});
    ScalarField u = 3.0 * random_band_limited(spec, rng, 8);
    const ScalarField t2 = truncate(u, 2.0);
    for (std::size_t i = 0; i < u.size(); ++i) {
      c.require(std::abs(t2[i]) <= std::abs(u[i]) + 1e-15, "|T_l u| > |u|");
      c.require(std::abs(t2[i]) <= 2.0 + 1e-15, "T_l exceeds level");
    }
    const ScalarField t12 = truncate(truncate(u, 2.0), 1.0);
    const ScalarField t1 = truncate(u, 1.0);
    for (std::size_t i = 0; i < u.size(); ++i)
      c.require(std::abs(t12[i]) <= std::abs(t1[i]) + 1e-15, "nested truncation grows");

    double linf = lp_norm(u, kInf);
    ScalarField sum(spec);
    for (long l = 0; l <= long(std::ceil(linf)); ++l) {
      const ScalarField bl = band(u, l);
      c.require(lp_norm(bl, kInf) <= double(l + 1) + 1e-15, "band exceeds l+1");
      sum = sum + bl;
    }
    c.require(max_rel_diff(sum, u) < 1e-15, "band decomposition is not a partition");

    // boundary ties go to the lower band
    ScalarField ties(spec);
    ties[0] = cplx{1.0, 0.0};
    ties[1] = cplx{2.0, 0.0};
    c.require(std::abs(band(ties, 0)[0]) == 1.0 && std::abs(band(ties, 1)[0]) == 0.0,
              "|u| = 1 must land in band 0");
    c.require(std::abs(band(ties, 1)[1]) == 2.0, "|u| = 2 must land in band 1");
  });

  battery.emplace_back("sequences.tail_holder", [](Check& c, Rng&) {
    auto step = [](std::span<const double> s) {
      return (s[0] >= 0.0 && s[0] < 1.0) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    };
    const GridSpec spec = GridSpec::x_grid({1.0}, {1024});
    const ScalarFamily conc = concentration(spec, step, 1.0, {0.0}, 2.0);
    const std::vector<double> ls{1, 2, 3, 4, 5, 6, 7, 8};
    const auto rows = tail_report(conc, ls);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      c.require(rows[i].sup_tail <= rows[i].sup_holder + 1e-12,
                "tail exceeds the Hoelder bound");
      if (i > 0)
        c.require(rows[i].sup_tail <= rows[i - 1].sup_tail + 1e-15,
                  "tail table not non-increasing");
    }
    // closed form: sup over ladder n with sqrt(n) > l of n^{-1/2}
    for (std::size_t i = 0; i < ls.size(); ++i) {
      double expected = 0.0;
      for (int n : conc.indices)
        if (std::sqrt(double(n)) > ls[i]) {
          expected = std::pow(double(n), -0.5);
          break;
        }
      c.require(std::abs(rows[i].sup_tail - expected) <= 0.02 * std::max(expected, 1e-12),
                "tail does not match the closed form");
    }
  });

  battery.emplace_back("sequences.transport_residual", [](Check& c, Rng& rng) {
    const GridSpec grid = GridSpec::phase_grid({1.0, 1.0}, {32, 64}, {1.0}, {32});
    const GridSpec yspec = grid.y_only();
    const ScalarField a = ScalarField::sample(
        yspec, [](std::span<const double> y) { return cplx{y[0], 0.0}; });
    auto w = [](double s) { return std::polar(1.0, kTwoPi * s); };
    const TransportFamily tf =
        transport_wave(grid, a, w, 1, std::nullopt, std::nullopt, {4});
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});

    std::vector<SymbolTerm> terms(2);
    terms[0].alpha = {1.0, 0.0};
    terms[0].coefficient =
        PhaseSpaceField(grid, std::vector<cplx>(grid.total(), cplx{1.0, 0.0}));
    terms[1].alpha = {0.0, 1.0};
    terms[1].coefficient = PhaseSpaceField::sample(
        grid, [](std::span<const double>, std::span<const double> y) {
          return cplx{y[0], 0.0};
        });
    const PrincipalSymbol P = make_principal_symbol(std::move(terms), aniso);

    // battery: generic tensors plus one pair resonant with the n = 2 wave at
    // the middle of the y box (frequency (-1, 2) matches n (x - y t) at y = 1/2)
    auto battery_g = default_residual_battery(grid, 4, rng);
    const GridSpec xspec = grid.x_only();
    TestFunctionPair resonant;
    resonant.x_part = multiply(sin_power_window(xspec, 8),
                               ScalarField::sample(xspec, [&](std::span<const double> tx) {
                                 return std::polar(1.0, kTwoPi * (2.0 * tx[1] - tx[0]));
                               }));
    resonant.y_part = sin_power_window(yspec, 8);
    battery_g.push_back(resonant);

    const std::vector<double> kappa{0.0};
    const TransportFamily tf2 =
        transport_wave(grid, a, w, 1, std::nullopt, std::nullopt, {2, 4});
    double res = 0.0;
    for (int n : {2, 4})
      res = std::max(res, weak_residual(tf2.family(n), P, kappa, nullptr, battery_g));
    c.note("residual " + fmt_double(res));
    c.require(res < 1e-10, "exact transport residual above 1e-10");

    // negative control: wrong coefficient
    std::vector<SymbolTerm> bad(2);
    bad[0] = P.terms[0];
    bad[1].alpha = {0.0, 1.0};
    bad[1].coefficient = PhaseSpaceField::sample(
        grid, [](std::span<const double>, std::span<const double> y) {
          return cplx{y[0] + 0.7, 0.0};
        });
    const PrincipalSymbol Pbad = make_principal_symbol(std::move(bad), aniso);
    const double res_bad = weak_residual(tf2.family(2), Pbad, kappa, nullptr, battery_g);
    c.note("negative " + fmt_double(res_bad));
    c.require(res_bad > 0.1, "mismatched symbol residual too small");
  });

  // ---- defect ---------------------------------------------------------------------

  battery.emplace_back("defect.bilinearity_rev2", [](Check& c, Rng& rng) {
    const GridSpec xspec = GridSpec::x_grid({1.0}, {256});
    const GridSpec grid = xspec;  // no y axes
    const Anisotropy aniso = Anisotropy::make({1.0});
    const SymbolOnManifold psi = named_symbol("sign_eta1", aniso);
    const MultiplierOp op = symbol_op(psi, aniso, xspec);

    const ScalarField v = random_band_limited(xspec, rng, 10);
    const PhaseSpaceField u = as_phase(random_band_limited(xspec, rng, 10));
    const ScalarField phi2 = sin_power_window(xspec, 1);
    const PhaseSpaceField f1 = as_phase(random_band_limited(xspec, rng, 4));
    const PhaseSpaceField f2 = as_phase(random_band_limited(xspec, rng, 4));
    const cplx a = rng.cnormal(), b = rng.cnormal();

    const cplx lhs = bilinear_sample(u, v, a * f1 + b * f2, phi2, op);
    const cplx rhs = a * bilinear_sample(u, v, f1, phi2, op) +
                     b * bilinear_sample(u, v, f2, phi2, op);
    c.require(rel_err(lhs, rhs) < 1e-12, "not linear in phi1");

    MultiplierOp op2 = op;
    for (auto& z : op2.table) z *= cplx{0.3, 0.4};
    MultiplierOp opsum = op;
    for (std::size_t i = 0; i < opsum.table.size(); ++i) opsum.table[i] += op2.table[i];
    const cplx s1 = bilinear_sample(u, v, f1, phi2, op) +
                    bilinear_sample(u, v, f1, phi2, op2);
    const cplx s2 = bilinear_sample(u, v, f1, phi2, opsum);
    c.require(rel_err(s1, s2) < 1e-12, "not additive in the symbol");

    // rev2 gap decays along an oscillation ladder
    const ScalarFamily fam = oscillation({1}, sin_power_window(xspec, 2));
    const DefectEstimate est =
        estimate(as_phase(fam), fam, as_phase(sin_power_window(xspec, 1)), phi2, psi, aniso);
    c.require(est.rev2_gap.back() < 0.5 * est.rev2_gap.front() + 1e-12,
              "rev2 commutation gap does not decay");
  });

  battery.emplace_back("defect.oscillation_oracle", [](Check& c, Rng&) {
    const GridSpec xspec = GridSpec::x_grid({1.0, 1.0}, {256, 256});
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});
    const std::vector<int> ladder{4, 8, 16, 32};
    const OraclePair pair = plane_oscillation_pair(xspec, {1, 0}, 4, ladder);
    const PhaseSpaceField phi1 = as_phase(sin_power_window(xspec, 1));
    const ScalarField phi2 = sin_power_window(xspec, 1);
    const SymbolOnManifold psi = named_symbol("eta1", aniso);
    const DefectEstimate est = estimate(pair.u, pair.v, phi1, phi2, psi, aniso);

    // oracle = conj(psi(pi_P k)) * int phi1 conj(phi2) |chi|^2
    const auto eta = project(std::vector<double>{1.0, 0.0}, aniso);
    const cplx psi_val = std::conj(psi.eval(eta));
    const cplx mass =
        integrate(multiply(multiply(phi1, conjugate(as_phase(phi2))),
                           as_phase(multiply(pair.chi, conjugate(pair.chi)))));
    const cplx oracle = psi_val * mass;
    c.note("est " + fmt_double(std::abs(est.limit)) + " oracle " +
           fmt_double(std::abs(oracle)));
    c.require(std::abs(est.limit - oracle) <= 0.02 * std::abs(oracle),
              "oscillation oracle mismatch above 2%");

    // equiboundedness with the pinned constant
    const double cd = std::max(psi.cd_norm_estimate, 1.0);
    for (std::size_t i = 0; i < est.samples.size(); ++i)
      c.require(std::abs(est.samples[i]) <= 25.0 * cd * est.sample_bound[i],
                "equiboundedness constant exceeded");
  });

  battery.emplace_back("defect.positivity_witness", [](Check& c, Rng&) {
    const GridSpec xspec = GridSpec::x_grid({1.0}, {512});
    const Anisotropy aniso = Anisotropy::make({1.0});
    const ScalarField chi = sin_power_window(xspec, 2);
    const ScalarField phi = sin_power_window(xspec, 1);
    for (const char* name : {"half_plus_eta1", "eta1_sq"}) {
      const SymbolOnManifold psi = named_symbol(name, aniso);
      const ScalarFamily fam = cos_oscillation(xspec, 1, chi, default_ladder());
      const HMeasureResult res =
          hmeasure_sample(as_phase(fam), fam, as_phase(phi), phi, psi, aniso);
      c.require(res.positivity_witness, std::string("positivity fails for ") + name);
    }
  });

  battery.emplace_back("defect.localization", [](Check& c, Rng&) {
    const std::vector<int> ladder{4, 8, 16};
    LocalizationSetup s = oscillation_localization_setup(ladder);
    const Anisotropy aniso = Anisotropy::make({1.0, 1.0});
    const SymbolOnManifold psi = named_symbol("one", aniso);

    // positive control: u solves dt u + dx u = 0 exactly (direction (-1, 1))
    const PrincipalSymbol good = constant_coefficient_symbol(
        s.grid, aniso, {{1, 0}, {0, 1}}, {{1, 0}, {1, 0}});
    const LocalizationResult pos =
        localization_residual(good, s.u, s.v, s.phi1, s.phi2, psi);
    c.note("pos " + fmt_double(std::abs(pos.est.limit) / pos.scale));
    c.require(std::abs(pos.est.limit) <= 0.03 * pos.scale,
              "exact-solution residual above 3% of scale");

    // negative control: dt + 2 dx does not annihilate the direction
    const PrincipalSymbol bad = constant_coefficient_symbol(
        s.grid, aniso, {{1, 0}, {0, 1}}, {{1, 0}, {2, 0}});
    const LocalizationResult neg =
        localization_residual(bad, s.u, s.v, s.phi1, s.phi2, psi);
    const cplx analytic =
        localization_analytic_value(bad, s, psi, std::vector<double>{-1.0, 1.0});
    c.note("neg " + fmt_double(std::abs(neg.est.limit)) + " analytic " +
           fmt_double(std::abs(analytic)));
    c.require(std::abs(neg.est.limit) > 0.5 * std::abs(analytic),
              "negative control below 50% of its analytic value");

    // non-leading terms are compact: adding a lower-order term moves the
    // residual limit by < 1% of scale
    const PrincipalSymbol good_low = constant_coefficient_symbol(
        s.grid, aniso, {{1, 0}, {0, 1}, {0, 0}}, {{1, 0}, {1, 0}, {0.5, 0}});
    const LocalizationResult pos_low =
        localization_residual(good_low, s.u, s.v, s.phi1, s.phi2, psi);
    c.require(std::abs(pos_low.est.limit - pos.est.limit) <= 0.01 * pos.scale,
              "lower-order term shifts the residual limit by more than 1%");
  });

  battery.emplace_back("defect.regularized_zero", [](Check& c, Rng&) {
    // machinery check on a strongly-null family under an rndc-satisfying
    // parabolic symbol
    const GridSpec grid = GridSpec::phase_grid({1.0, 1.0}, {32, 64}, {1.0}, {16});
    const Anisotropy aniso = Anisotropy::make({1.0, 2.0});
    std::vector<SymbolTerm> terms(2);
    terms[0].alpha = {1.0, 0.0};
    terms[0].coefficient =
        PhaseSpaceField(grid, std::vector<cplx>(grid.total(), cplx{1.0, 0.0}));
    terms[1].alpha = {0.0, 2.0};
    terms[1].coefficient = PhaseSpaceField::sample(
        grid, [](std::span<const double>, std::span<const double> y) {
          return cplx{-(1.0 + 0.5 * y[0]), 0.0};
        });
    const PrincipalSymbol A = make_principal_symbol(std::move(terms), aniso);

    const GridSpec xspec = grid.x_only();
    const ScalarField chi = sin_power_window(xspec, 2);
    const std::vector<int> ladder{4, 8, 16};
    ScalarFamily fam_v = oscillation({0, 1}, chi, ladder);
    PhaseFamily fam_u;
    fam_u.indices = ladder;
    fam_u.p_bound = 2.0;
    fam_u.generator = [grid, chi](int n) {
      return (1.0 / double(n)) * broadcast_x(chi, grid);
    };
    const PhaseSpaceField phi1 =
        multiply(broadcast_x(sin_power_window(xspec, 1), grid),
                 PhaseSpaceField(grid, std::vector<cplx>(grid.total(), cplx{1.0, 0.0})));
    const ScalarField phi2 = sin_power_window(xspec, 1);
    const SymbolOnManifold psi = named_symbol("one", aniso);
    const std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
    const RegularizedZeroReport rep =
        regularized_zero_test(A, fam_u, fam_v, phi1, phi2, psi, deltas);
    c.require(rep.applicable, "parabolic symbol should pass the rndc gate");
    c.require(rep.inequality_ok, "ggnc quantitative inequality violated");
    c.require(rep.concluded_zero, "strongly-null family not concluded zero");

    // degenerate constant transport must be refused
    const PrincipalSymbol deg = constant_coefficient_symbol(
        grid, Anisotropy::make({1.0, 1.0}), {{1, 0}, {0, 1}}, {{1, 0}, {1, 0}});
    const RegularizedZeroReport rep2 =
        regularized_zero_test(deg, fam_u, fam_v, phi1, phi2,
                              named_symbol("one", Anisotropy::make({1.0, 1.0})), deltas);
    c.require(!rep2.applicable, "degenerate symbol must be refused");
  });

  battery.emplace_back("defect.band_basis_decomposition", [](Check& c, Rng&) {
    const GridSpec grid = GridSpec::phase_grid({1.0}, {256}, {1.0}, {32});
    const GridSpec xspec = grid.x_only();
    const Anisotropy aniso = Anisotropy::make({1.0});
    const SymbolOnManifold psi = named_symbol("sign_eta1", aniso);
    const std::vector<int> ladder{4, 8, 16};

    const ScalarField chi = 2.5 * sin_power_window(xspec, 2);
    ScalarFamily fam_v = oscillation({1}, chi, ladder);
    const GridSpec yspec = grid.y_only();
    const ScalarField gy = ScalarField::sample(yspec, [&](std::span<const double> y) {
      return cplx{1.0 + 0.5 * std::cos(kTwoPi * y[0] / yspec.extent(0)), 0.0};
    });
    PhaseFamily fam_u;
    fam_u.indices = ladder;
    fam_u.p_bound = 2.0;
    fam_u.generator = [grid, gy, gen = fam_v.generator](int n) {
      return tensor(gen(n), gy, grid);
    };

    const PhaseSpaceField phi1 = tensor(sin_power_window(xspec, 1),
                                        sin_power_window(yspec, 2), grid);
    const ScalarField phi2 = sin_power_window(xspec, 1);

    const DecompositionReport bands =
        band_decomposition_check(fam_u, fam_v, phi1, phi2, psi, aniso, 6);
    for (std::size_t i = 1; i < bands.rows.size(); ++i)
      c.require(bands.rows[i].gap <= bands.rows[i - 1].gap + 1e-12,
                "band gap not non-increasing");
    for (const auto& row : bands.rows)
      c.require(row.gap <= row.bound + 1e-12, "band gap exceeds its tail bound");
    const long lstar = long(std::ceil(lp_norm(fam_u(16), kInf)));
    c.require(lstar <= 6, "test family amplitude unexpectedly large");
    c.require(bands.rows[std::size_t(lstar)].gap <=
                  1e-3 * std::max(bands.direct_scale, 1e-300),
              "band gap not tiny at L = ceil(sup |u|)");

    const DecompositionReport basis =
        basis_decomposition_check(fam_u, fam_v, phi1, phi2, psi, aniso, 16);
    c.require(basis.rows.back().gap <= 1e-3 * std::max(basis.direct_scale, 1e-300),
              "basis gap not tiny at I = 16");
    for (std::size_t i = 1; i < basis.rows.size(); ++i)
      c.require(basis.rows[i].gap <= basis.rows[i - 1].gap + 1e-9 * basis.direct_scale,
                "basis gap not non-increasing");
  });

  // ---- averaging -------------------------------------------------------------------

  battery.emplace_back("averaging.linearity_holder", [](Check& c, Rng& rng) {
    const GridSpec grid = GridSpec::phase_grid({1.0}, {64}, {1.0}, {32});
    const GridSpec yspec = grid.y_only();
    const ScalarField gx = random_band_limited(grid.x_only(), rng, 8);
    const ScalarField gy1 = random_band_limited(yspec, rng, 6);
    const ScalarField gy2 = random_band_limited(yspec, rng, 6);
    const PhaseSpaceField u1 = tensor(gx, gy1, grid);
    const PhaseSpaceField u2 = tensor(gx, gy2, grid);
    const ScalarField rho = sin_power_window(yspec, 4);
    const cplx a = rng.cnormal(), b = rng.cnormal();

    const ScalarField lhs = velocity_average(a * u1 + b * u2, rho);
    const ScalarField rhs = a * velocity_average(u1, rho) + b * velocity_average(u2, rho);
    c.require(max_rel_diff(lhs, rhs) < 1e-12, "velocity average not linear in u");

    const ScalarField lhs2 = velocity_average(u1, a * rho + b * gy2);
    const ScalarField rhs2 =
        a * velocity_average(u1, rho) + b * velocity_average(u1, gy2);
    c.require(max_rel_diff(lhs2, rhs2) < 1e-12, "velocity average not linear in rho");

    // separable oracle and the Hoelder bound
    const cplx wg = integrate(multiply(rho, gy1));
    c.require(max_rel_diff(velocity_average(u1, rho), wg * gx) < 1e-12,
              "separable average oracle fails");
    c.require(lp_norm(velocity_average(u1, rho), 1.0) <=
                  lp_norm(rho, kInf) * lp_norm(u1, 1.0) + 1e-12,
              "Hoelder bound violated");
  });

  battery.emplace_back("averaging.dichotomy", [](Check& c, Rng&) {
    const GridSpec grid = GridSpec::phase_grid({1.0, 1.0}, {64, 128}, {1.0}, {64});
    const GridSpec yspec = grid.y_only();
    const GridSpec xspec = grid.x_only();
    const std::vector<int> ladder{4, 8, 16, 24};
    auto w = [](double s) { return std::polar(1.0, kTwoPi * s); };
    const ScalarField rho = sin_power_window(yspec, 8);
    const Region K{{0.2, 0.1}, {0.9, 0.9}};
    const std::vector<double> h_ladder{1.0 / 256, 1.0 / 128, 1.0 / 64, 1.0 / 32,
                                       1.0 / 16};
    const std::vector<double> levels{0.05, 0.1, 0.2, 0.4};
    const ScalarField phi_energy = sin_power_window(xspec, 2);

    // non-degenerate: a(y) = y
    const ScalarField ay = ScalarField::sample(
        yspec, [](std::span<const double> y) { return cplx{y[0], 0.0}; });
    const TransportFamily tf_good =
        transport_wave(grid, ay, w, 1, std::nullopt, std::nullopt, ladder);
    std::vector<ScalarField> avg_good;
    for (int n : ladder) avg_good.push_back(velocity_average(tf_good.family(n), rho));
    const CompactnessReport good = compactness_diagnostic(
        avg_good, ladder, K, h_ladder, phi_energy, levels);
    c.note("good " + good.verdict);
    c.require(good.verdict == "compact", "non-degenerate transport must be compact");
    // truncated energies decrease across n at the top level
    const std::size_t lv = levels.size() - 1;
    c.require(good.trunc_energy.back()[lv] < 0.5 * good.trunc_energy.front()[lv] + 1e-18,
              "truncated energy does not decay in the compact regime");
    c.require(good.rk_persistence < 0.5, "rk modulus should collapse when compact");

    // degenerate: a constant
    const ScalarField a1 =
        ScalarField(yspec, std::vector<cplx>(yspec.total(), cplx{1.0, 0.0}));
    const TransportFamily tf_bad =
        transport_wave(grid, a1, w, 1, std::nullopt, std::nullopt, ladder);
    std::vector<ScalarField> avg_bad;
    for (int n : ladder) avg_bad.push_back(velocity_average(tf_bad.family(n), rho));
    const CompactnessReport bad = compactness_diagnostic(
        avg_bad, ladder, K, h_ladder, phi_energy, levels);
    c.note("bad " + bad.verdict);
    c.require(bad.verdict == "non-compact", "degenerate transport must be non-compact");
    c.require(bad.rk_persistence >= 0.5, "rk modulus must persist when non-compact");
    const double e_first = bad.trunc_energy.front().back();
    const double e_last = bad.trunc_energy.back().back();
    c.require(e_last > 0.5 * e_first, "degenerate truncated energy should stabilize");

    // all-zero ladder is compact
    std::vector<ScalarField> zeros(ladder.size(), ScalarField(xspec));
    const CompactnessReport z =
        compactness_diagnostic(zeros, ladder, K, h_ladder, phi_energy, levels);
    c.require(z.verdict == "compact", "zero averages must be compact");
  });

  // ---- reporting ---------------------------------------------------------------------

  battery.emplace_back("report.csv_and_schema", [schema_dir](Check& c, Rng&) {
    CsvWriter csv({"n", "re", "im", "norm_bound"});
    csv.add_row({"4", "1.5", "0", "2"});
    const std::string text = csv.str();
    c.require(text.rfind("n,re,im,norm_bound\r\n", 0) == 0, "CSV missing header row");

    namespace fs = std::filesystem;
    const fs::path sd(schema_dir);
    if (!fs::exists(sd / "verdict.schema.json")) {
      throw std::runtime_error("skip: schema directory not found");
    }
    nlohmann::json schema;
    std::ifstream is(sd / "verdict.schema.json");
    is >> schema;
    const nlohmann::json verdict = {{"limit_re", 0.0},
                                    {"limit_im", 0.0},
                                    {"fit_residual", 1e-9},
                                    {"verdict", "zero"}};
    c.require(validate_against_schema(verdict, schema).empty(),
              "verdict record does not validate");
    const nlohmann::json bad = {{"limit_re", 0.0}};
    c.require(!validate_against_schema(bad, schema).empty(),
              "validator must reject incomplete records");
  });

  if (inject_failure) {
    battery.emplace_back("verify.injected_failure", [](Check& c, Rng&) {
      c.require(false, "deliberate failure (requested via --inject-failure)");
    });
  }

  // ---- run ----------------------------------------------------------------------------

  VerifySummary summary;
  summary.results.resize(battery.size());
  parallel_for(battery.size(), [&](std::size_t i) {
    InvariantResult r;
    r.name = battery[i].first;
    Rng rng(seed * 0x100000001b3ULL + i * 0x9e3779b97f4a7c15ULL + 0xcbf29ce484222325ULL);
    Check check;
    try {
      battery[i].second(check, rng);
      r.passed = check.ok;
      r.detail = check.detail.str();
    } catch (const std::exception& e) {
      const std::string what = e.what();
      if (what.rfind("skip:", 0) == 0) {
        r.skipped = true;
        r.detail = what;
      } else {
        r.passed = false;
        r.detail = std::string("exception: ") + what;
      }
    }
    summary.results[i] = std::move(r);
  });

  for (const auto& r : summary.results) {
    if (r.skipped) ++summary.skipped;
    else if (r.passed) ++summary.passed;
    else ++summary.failed;
  }

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  nlohmann::json j = {{"passed", summary.passed},
                      {"failed", summary.failed},
                      {"skipped", summary.skipped},
                      {"seed", seed}};
  nlohmann::json results = nlohmann::json::array();
  CsvWriter csv({"name", "status", "detail"});
  for (const auto& r : summary.results) {
    const std::string status = r.skipped ? "skipped" : (r.passed ? "pass" : "fail");
    results.push_back({{"name", r.name}, {"status", status}, {"detail", r.detail}});
    csv.add_row({r.name, status, r.detail});
  }
  j["results"] = results;
  write_json((fs::path(out_dir) / "summary.json").string(), j);
  atomic_write((fs::path(out_dir) / "verify.csv").string(), csv.str());
  return summary;
}

}  // namespace defectlab
