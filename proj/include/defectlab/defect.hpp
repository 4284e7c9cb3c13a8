// defect.hpp — H-distribution / H-measure estimators: sampled bilinear forms
// B_n(phi1, phi2, psi) = int phi1 u_n conj(A_{psi o pi_P}(phi2 v_n)) dx dy,
// their extrapolated limits, the commutator-decay experiment, the
// localization principle A.B = 0, the delta-regularized zero test, and the
// band / basis decompositions of the estimated functionals.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defectlab/multipliers.hpp"
#include "defectlab/sequences.hpp"
#include "defectlab/symbols.hpp"

namespace defectlab {

/// View an x-only field (family) as a phase-space object with no y axes.
PhaseSpaceField as_phase(const ScalarField& f);
PhaseFamily as_phase(const ScalarFamily& fam);

// ---- sampled bilinear form -----------------------------------------------------

cplx bilinear_sample(const PhaseSpaceField& u, const ScalarField& v,
                     const PhaseSpaceField& phi1, const ScalarField& phi2,
                     const MultiplierOp& op);

cplx bilinear_sample(const PhaseSpaceField& u, const ScalarField& v,
                     const PhaseSpaceField& phi1, const ScalarField& phi2,
                     const SymbolOnManifold& psi, const Anisotropy& aniso);

// ---- extrapolated estimates ------------------------------------------------------

struct DefectEstimate {
  std::vector<int> indices;
  std::vector<cplx> samples;
  cplx limit{0.0, 0.0};
  double fit_residual = 0.0;
  std::string method;  // "1/n-fit" or "tail-average"
  bool converged = false;
  double scale = 0.0;              // product of input norms, for zero thresholds
  std::vector<double> sample_bound;  // per-n equiboundedness bound, when available
  std::vector<double> rev2_gap;  // |B_n - B_n with phi2 moved outside|, if checked

  /// |limit| < max(1e-6 * scale, 2 * fit_residual)
  bool declared_zero() const;
};

/// Affine fit in 1/n over the top half of the ladder, tail-average fallback.
DefectEstimate extrapolate(std::vector<int> indices, std::vector<cplx> samples,
                           double scale);

struct EstimateOptions {
  bool check_rev2 = true;
};

DefectEstimate estimate(const PhaseFamily& fam_u, const ScalarFamily& fam_v,
                        const PhaseSpaceField& phi1, const ScalarField& phi2,
                        const SymbolOnManifold& psi, const Anisotropy& aniso,
                        const EstimateOptions& opt = {});

/// Same computation as `estimate` (Theorem-level identification of the
/// L^2 H-measure with the H-distribution); additionally reports whether the
/// positivity witness holds (real, non-negative limit up to fit noise).
struct HMeasureResult {
  DefectEstimate est;
  bool positivity_witness = false;
};

HMeasureResult hmeasure_sample(const PhaseFamily& fam_u, const ScalarFamily& fam_v,
                               const PhaseSpaceField& phi1, const ScalarField& phi2,
                               const SymbolOnManifold& psi, const Anisotropy& aniso);

// ---- commutator decay -------------------------------------------------------------

struct CommutatorDecay {
  std::vector<int> indices;
  std::vector<double> norm_q, norm_2, norm_r;
  double slope = 0.0;
  bool pass = false;              // final norm below 25% of initial, slope < 0
  bool interpolation_ok = false;  // ||C v||_q <= ||C v||_2^a ||C v||_r^{1-a}
  double alpha = 0.0;
  double q = 0.0, r = 0.0;
};

/// Decay table for C v_n = A_psi(b v_n) - b A_psi(v_n) in L^q, with the
/// interpolation-inequality cross-check against L^2 and L^r.
CommutatorDecay commutator_decay(const ScalarField& b, const SymbolOnManifold& psi,
                                 const Anisotropy& aniso, const ScalarFamily& fam_v,
                                 double q, double r = 8.0);

// ---- localization principle --------------------------------------------------------

struct LocalizationResult {
  DefectEstimate est;
  double scale = 0.0;  // sum over terms of the Cauchy-Schwarz sample bounds
  std::vector<double> source_norms;  // dual-space report of G_n, when provided
  bool source_decays = true;
};

/// Assembles sum_k B_n(a_k phi1, psi (-2 pi i pi_P)^{alpha_k} guarded, with
/// the T^{gamma - sum alpha/beta} factor on non-leading terms); for weak
/// solution families the limit is the numerical localization principle.
LocalizationResult localization_residual(const PrincipalSymbol& A,
                                         const PhaseFamily& fam_u,
                                         const ScalarFamily& fam_v,
                                         const PhaseSpaceField& phi1,
                                         const ScalarField& phi2,
                                         const SymbolOnManifold& psi,
                                         double gamma = 1.0,
                                         const PhaseFamily* source = nullptr);

// ---- delta-regularized zero test ----------------------------------------------------

struct RegularizedZeroReport {
  bool applicable = false;
  std::string reason;
  std::vector<double> deltas;
  std::vector<double> gaps;     // delta / (min|A|^2 + delta)
  std::vector<cplx> values;     // extrapolated <B, phi psi |A|^2/(|A|^2+delta)>
  double bound_M = 0.0;         // sup_n of the L2 sample bound
  bool inequality_ok = false;   // |V(d1)-V(d2)| <= gap(max d) * M, all pairs
  bool concluded_zero = false;  // |V(min d)| + gap(min d) * M below tolerance
  double scale = 0.0;
};

/// Tests <B, phi psi |A|^2/(|A|^2+delta)> across a delta ladder by expanding
/// the regularized fraction in a separable frequency basis (two-point basis
/// for d = 1, polar harmonics on P^2 for d = 2). Requires the restrictive
/// non-degeneracy scan to pass; refuses otherwise.
RegularizedZeroReport regularized_zero_test(const PrincipalSymbol& A,
                                            const PhaseFamily& fam_u,
                                            const ScalarFamily& fam_v,
                                            const PhaseSpaceField& phi1,
                                            const ScalarField& phi2,
                                            const SymbolOnManifold& psi,
                                            std::span<const double> deltas,
                                            int max_harmonic = 12);

// ---- decompositions ------------------------------------------------------------------

struct DecompositionRow {
  double param = 0.0;  // L (band level) or I (mode count)
  double gap = 0.0;    // sup_n |direct - partial sum|
  double bound = 0.0;  // sup_n tail bound (bands only; 0 for basis rows)
};

struct DecompositionReport {
  std::vector<DecompositionRow> rows;
  double direct_scale = 0.0;  // sup_n |direct B_n|
};

DecompositionReport band_decomposition_check(
    const PhaseFamily& fam_u, const ScalarFamily& fam_v, const PhaseSpaceField& phi1,
    const ScalarField& phi2, const SymbolOnManifold& psi, const Anisotropy& aniso,
    long l_max);

DecompositionReport basis_decomposition_check(
    const PhaseFamily& fam_u, const ScalarFamily& fam_v, const PhaseSpaceField& phi1,
    const ScalarField& phi2, const SymbolOnManifold& psi, const Anisotropy& aniso,
    std::size_t i_max);

/// y-lattice modes ordered by (sum |k_j|, lexicographic), as used by the
/// basis decomposition.
std::vector<std::vector<long>> ordered_y_modes(const GridSpec& spec, std::size_t count);

}  // namespace defectlab
