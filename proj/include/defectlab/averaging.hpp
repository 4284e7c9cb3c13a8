// averaging.hpp — velocity averages int rho(y) u(x,y) dy, strong-compactness
// diagnostics on the sampled ladder (pairwise L1 distances, Riesz-Kolmogorov
// translation moduli, truncated energies), weak-solution residuals, and the
// combined averaging experiment juxtaposing symbol degeneracy against average
// compactness.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "defectlab/defect.hpp"
#include "defectlab/grid.hpp"
#include "defectlab/sequences.hpp"
#include "defectlab/symbols.hpp"

namespace defectlab {

/// int rho(y) u(x, y) dy per x grid point; rho lives on the y grid of u.
ScalarField velocity_average(const PhaseSpaceField& u, const ScalarField& rho);

// ---- compactness diagnostic ------------------------------------------------------

struct CompactnessReport {
  std::vector<int> indices;
  std::vector<double> l1_norms;                   // L1(K) per index
  std::vector<std::vector<double>> cauchy;        // pairwise L1(K) distances
  std::vector<double> h_ladder;
  std::vector<std::vector<double>> omega;         // [n][h]: ||tau_h v - v||_{L1(K)}
  std::vector<double> trunc_levels;
  std::vector<std::vector<double>> trunc_energy;  // [n][l]: int phi^2 |T_l avg|^2
  double decay_slope = 0.0;
  bool weak_null = false;      // battery on the averages themselves
  double rk_persistence = 0.0; // min_n sup_h omega_n / sup_h omega_{n_first}
  std::string verdict;         // "compact" | "non-compact" | "inconclusive"
};

/// Verdict rules (pinned):
///   compact      — final L1(K) norm < 50% of initial, fitted log-log slope
///                  < -0.25, and top-half pairwise distances <= 50% of the
///                  largest norm (all-zero ladders are compact outright);
///   non-compact  — min norm >= 50% of initial while the weak-null battery
///                  on the averages passes;
///   inconclusive — otherwise.
CompactnessReport compactness_diagnostic(const std::vector<ScalarField>& averages,
                                         const std::vector<int>& indices,
                                         const Region& K,
                                         std::span<const double> h_ladder,
                                         const ScalarField& phi_energy,
                                         std::span<const double> trunc_levels);

// ---- weak-solution residual -------------------------------------------------------

/// Separable test function g(x, y) = x_part(x) * y_part(y).
struct TestFunctionPair {
  ScalarField x_part;
  ScalarField y_part;
};

/// Max over the battery of |LHS - RHS| of the weak formulation, normalized:
/// LHS = sum_k int a_k u conj((-d_x)^{alpha_k} g),
/// RHS = (-1)^{|kappa|} int G conj(d_y^kappa g), derivatives applied
/// spectrally to the test functions.
double weak_residual(const PhaseSpaceField& u, const PrincipalSymbol& P,
                     std::span<const double> kappa, const PhaseSpaceField* G,
                     std::span<const TestFunctionPair> battery);

/// Battery of band-limited tensor test functions vanishing to high order at
/// every box boundary (so pairings with non-periodic characteristics stay
/// spectrally accurate).
std::vector<TestFunctionPair> default_residual_battery(const GridSpec& phase_spec,
                                                       std::size_t count, Rng& rng,
                                                       int boundary_order = 8);

/// sin^{2q}(pi x/L)-type interior window (a trig polynomial of degree q per
/// axis; exactly band-limited).
ScalarField sin_power_window(const GridSpec& xspec, int q);

/// Smooth compactly supported (t,x) window with closed-form partials.
Window tensor_bump_window(double t_center, double t_halfwidth, double x_center,
                          double x_halfwidth);

// ---- combined experiment ------------------------------------------------------------

struct AveragingExperimentInput {
  PhaseFamily family;
  PhaseFamily source;  // may generate zero fields
  bool windowed = false;
  PrincipalSymbol symbol;
  std::vector<double> kappa;  // y-derivative multi-index of the source term
  ScalarField rho;            // velocity test function, on the y grid
  Region K;
  std::vector<double> h_ladder;
  std::vector<double> trunc_levels;
  ScalarField phi_energy;      // x grid
  PhaseSpaceField phi1;        // localization test function (x,y)
  ScalarField phi2;            // localization test function (x)
  SymbolOnManifold psi;
  std::size_t residual_battery_size = 4;
  std::size_t residual_indices = 2;  // run the residual on the first few n only
  std::uint64_t seed = 1;
};

struct AveragingExperimentReport {
  DegeneracyReport degeneracy;
  double residual = 0.0;
  LocalizationResult localization;
  CompactnessReport compactness;
  std::vector<double> source_norms;
  std::string verdict;
};

AveragingExperimentReport run_averaging_experiment(const AveragingExperimentInput& in);

}  // namespace defectlab
