// symbols.hpp — multiplier symbols on the manifold P^d, principal symbols of
// quasi-homogeneous operators, and their certification / degeneracy
// diagnostics.
//
// Fractional power branch, fixed globally: for real xi and alpha >= 0,
//   (s * 2 pi i xi)^alpha := |2 pi xi|^alpha * exp(s * i alpha pi/2 * sgn xi),
// s = +1 or -1. For integer alpha this agrees with the literal power.

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "defectlab/anisotropy.hpp"
#include "defectlab/grid.hpp"

namespace defectlab {

/// (sign * 2 pi i * xi)^alpha on the principal branch; 0^0 = 1, 0^alpha = 0.
cplx imag_power(double xi, double alpha, int sign = +1);

/// A symbol psi defined on P^d, applied to frequencies through pi_P.
/// cd_norm_estimate is a numerical sup of ambient derivatives of psi o pi_P
/// up to order d at manifold samples (a surrogate for ||psi||_{C^d(P^d)}).
struct SymbolOnManifold {
  std::function<cplx(std::span<const double>)> eval;
  double cd_norm_estimate = 0.0;
  std::string label;
};

double estimate_cd_norm(const SymbolOnManifold& psi, const Anisotropy& aniso,
                        std::size_t samples = 128, int order = -1);

SymbolOnManifold make_symbol(std::string label,
                             std::function<cplx(std::span<const double>)> eval,
                             const Anisotropy& aniso);

/// Registry of named symbols used by configs and tests: "one", "eta1",
/// "eta2", "eta1_sq", "eta_diff_sq", "sign_eta1", "gauss_eta1",
/// "half_plus_eta1".
SymbolOnManifold named_symbol(const std::string& name, const Anisotropy& aniso);

/// Table of psi(pi_P(k/L)) over the x frequency lattice of `spec`, with the
/// k = 0 entry set to 0 (pi_P is undefined at the origin).
std::vector<cplx> extend_symbol(const SymbolOnManifold& psi,
                                const Anisotropy& aniso, const GridSpec& spec);

// ---- Marcinkiewicz certification ---------------------------------------------

/// Numerical sup of |xi^a d^a psi(xi)| over dyadic annuli
/// 2^-8 <= |xi|_beta <= 2^8 and all multi-indices |a| <= order_cap,
/// derivatives by central differences with relative step. The estimate is
/// recomputed at a refined level (denser radii and directions, half step);
/// certification fails when the sup grows by more than 5% under refinement.
struct MarcinkiewiczReport {
  double sup_coarse = 0.0;
  double sup_fine = 0.0;
  bool certified = false;
  double constant() const { return sup_fine; }
};

MarcinkiewiczReport marcinkiewicz_sup(
    const std::function<cplx(std::span<const double>)>& psi,
    const Anisotropy& aniso, int order_cap = -1);

// ---- principal symbols --------------------------------------------------------

/// One term a_k(x,y) (2 pi i xi)^{alpha_k} of a principal symbol.
struct SymbolTerm {
  PhaseSpaceField coefficient;
  std::vector<double> alpha;
};

/// A(x,y,xi) = sum_{k in leading} a_k(x,y) (2 pi i xi)^{alpha_k}, with the
/// homogeneity vector beta and the leading subset I' (sum_j alpha_kj/beta_j = 1).
struct PrincipalSymbol {
  std::vector<SymbolTerm> terms;
  Anisotropy aniso;
  std::vector<std::size_t> leading;

  std::size_t order_sum_ok() const { return leading.size(); }
  double homogeneity_defect(std::size_t k) const;  // 1 - sum_j alpha_kj/beta_j
};

/// I' = { k : sum_j alpha_kj/beta_j = 1 within 1e-12 }. Throws
/// std::invalid_argument("invalid anisotropy") when some term exceeds 1.
std::vector<std::size_t> classify_leading(
    const std::vector<std::vector<double>>& alphas, const Anisotropy& aniso);

/// Builds the symbol, classifies leading terms and checks that every leading
/// exponent is an integer or >= d.
PrincipalSymbol make_principal_symbol(std::vector<SymbolTerm> terms,
                                      const Anisotropy& aniso);

/// A at a grid point (flat x index, flat y index of the coefficient fields)
/// and frequency xi; leading terms only.
cplx evaluate_principal(const PrincipalSymbol& A, std::size_t xflat,
                        std::size_t yflat, std::span<const double> xi);

// ---- degeneracy diagnostics ---------------------------------------------------

struct DegeneracyReport {
  double min_abs_rndc = 0.0;            // min over (x,y) grid and manifold samples of |A|
  double kingnl_violation_measure = 0;  // max over (x,xi) of y-fraction with |A| ~ 0
  double max_abs = 0.0;
  double tol_zero = 0.0;
};

DegeneracyReport degeneracy_scan(const PrincipalSymbol& A,
                                 std::size_t manifold_count = 256,
                                 std::size_t max_x_samples = 64);

/// Same scan at an explicit list of frequency points (projected internally).
DegeneracyReport degeneracy_scan_at(const PrincipalSymbol& A,
                                    const std::vector<std::vector<double>>& xi_points,
                                    std::size_t max_x_samples = 64);

/// sup over the sampled grid and manifold of delta/(|A|^2 + delta)
/// = sup |1 - |A|^2/(|A|^2+delta)|.
double delta_regularizer_gap(const PrincipalSymbol& A, double delta,
                             std::size_t manifold_count = 256,
                             std::size_t max_x_samples = 64);

/// Same with explicit frequency samples (lets tests place a known zero of A
/// in the sampled set).
double delta_regularizer_gap_at(const PrincipalSymbol& A, double delta,
                                const std::vector<std::vector<double>>& xi_points,
                                std::size_t max_x_samples = 64);

/// All multi-indices in N^d with |a| <= cap (helper shared with tests).
std::vector<std::vector<int>> multi_indices_up_to(std::size_t dim, int cap);

}  // namespace defectlab
