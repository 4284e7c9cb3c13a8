// multipliers.hpp — Fourier multiplier operators on the x lattice: generic
// table application, fractional derivatives, the high-pass smoothing operator
// T^gamma with symbol (1-theta)/|xi|_beta^gamma, anisotropic Bessel weights,
// and multiplier/multiplication commutators.
//
// Nyquist convention: when a derivative-type table carries an exponent that is
// not an even integer along some axis, the k = -N/2 row of that axis is
// zeroed (the lattice has no +N/2 partner, and odd symbols would otherwise
// break conjugate symmetry of real fields).

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defectlab/anisotropy.hpp"
#include "defectlab/grid.hpp"
#include "defectlab/symbols.hpp"

namespace defectlab {

/// A multiplier operator: one complex table entry per x-lattice frequency.
struct MultiplierOp {
  GridSpec spec;  // x-only spec
  std::vector<cplx> table;
  std::string label;

  double sup() const;
};

ScalarField apply(const MultiplierOp& op, const ScalarField& f);
/// Apply to a precomputed spectrum (saves the forward transform in loops).
ScalarField apply_spectrum(const MultiplierOp& op, const SpectralField& F);

MultiplierOp compose(const MultiplierOp& a, const MultiplierOp& b);

/// Table builders ------------------------------------------------------------

MultiplierOp identity_op(const GridSpec& spec);

/// psi o pi_P as a table (wraps extend_symbol; k = 0 entry is 0).
MultiplierOp symbol_op(const SymbolOnManifold& psi, const Anisotropy& aniso,
                       const GridSpec& spec);

/// (sign * 2 pi i xi)^alpha componentwise across axes; Nyquist rows zeroed on
/// axes whose exponent is not an even integer.
MultiplierOp derivative_op(const GridSpec& spec, std::span<const double> alpha,
                           int sign = +1);

/// (1 - theta(xi)) |xi|_beta^{-gamma}; zero on the unit quasi-ball and at DC.
MultiplierOp smoothing_op(const GridSpec& spec, double gamma, const Anisotropy& aniso);

/// Anisotropic Bessel weight (1 + |xi|_beta^l)^{s/l}.
MultiplierOp bessel_op(const GridSpec& spec, double s, const Anisotropy& aniso);

/// (1-theta(xi)) * [psi(pi_P xi)] * prod_j (sign*2 pi i (pi_P xi)_j)^{alpha_j}
///   * |xi|_beta^{-t_exponent}.
/// This is the assembled operator of the localization tests; psi may be null.
/// Nyquist rows zeroed per the derivative convention on each alpha_j.
MultiplierOp projected_power_op(const GridSpec& spec, const Anisotropy& aniso,
                                std::span<const double> alpha, int sign,
                                double t_exponent,
                                const SymbolOnManifold* psi = nullptr);

/// Operations ------------------------------------------------------------------

ScalarField fractional_derivative(const ScalarField& f, std::span<const double> alpha);

ScalarField smoothing_T(const ScalarField& f, double gamma, const Anisotropy& aniso);

/// || (1 + |xi|_beta^l)^{s/l} f ||_p — the W^{s beta, p} surrogate norm.
double sobolev_norm(const ScalarField& f, double s, const Anisotropy& aniso, double p);

/// C f = A_psi(b f) - b A_psi(f) for a sampled continuous function b.
ScalarField commutator_apply(const ScalarField& b, const MultiplierOp& psi_op,
                             const ScalarField& f);

/// Random field supported on quasi-annulus |k/L|_beta >= min_radius
/// (high-pass input for the smoothing-operator boundedness checks).
ScalarField random_high_pass(const GridSpec& spec, Rng& rng, const Anisotropy& aniso,
                             double min_radius, long max_mode);

}  // namespace defectlab
