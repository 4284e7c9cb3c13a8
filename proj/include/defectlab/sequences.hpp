// sequences.hpp — generators of weakly-null sequence families with known
// analytic behavior (oscillation, concentration, transport waves), the
// truncation/band operators, and the uniform-bound / weak-null batteries.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "defectlab/anisotropy.hpp"
#include "defectlab/grid.hpp"

namespace defectlab {

template <class FieldT>
struct SequenceFamily {
  std::function<FieldT(int)> generator;
  double p_bound = 2.0;            // L^p exponent of the uniform bound
  std::vector<int> indices;        // sampled ladder
  std::string label;

  FieldT operator()(int n) const { return generator(n); }
};

using ScalarFamily = SequenceFamily<ScalarField>;
using PhaseFamily = SequenceFamily<PhaseSpaceField>;

std::vector<int> default_ladder();  // {4, 8, 16, 32, 64}

// ---- family health checks -----------------------------------------------------

struct FamilyCheck {
  bool bounded = false;       // L^p norms drift below 5%
  double norm_drift = 0.0;    // max/min - 1
  bool weak_null = false;     // pairing battery trends to zero
  double worst_slope = 0.0;   // largest fitted log-log slope across the battery
  std::vector<double> norms;  // per sampled index
};

/// The weak-null battery is deterministic: windowed plane waves (their
/// modulus has no interior roots, so pairing trends are monotone once the
/// family's asymptotics set in).
std::vector<ScalarField> weak_null_battery(const GridSpec& xspec, int count);

FamilyCheck check_family(const ScalarFamily& fam, int battery_size = 10);
FamilyCheck check_family(const PhaseFamily& fam, int battery_size = 10);

/// Least-squares slope of log|values| against log n (values floored at
/// `floor_at` to keep spectrally-dead pairings out of the log).
double log_log_slope(std::span<const int> n, std::span<const double> values,
                     double floor_at);

/// Same, fitted on the top half of the ladder (at least 3 points), where the
/// asymptotic trend dominates pre-asymptotic wander.
double tail_slope(std::span<const int> n, std::span<const double> values,
                  double floor_at);

// ---- generators ----------------------------------------------------------------

/// u_n(x) = e^{2 pi i n k.x/L} profile(x). Rejects ladders driving n*k to the
/// Nyquist row or beyond.
ScalarFamily oscillation(std::vector<long> k, ScalarField profile,
                         std::vector<int> indices = default_ladder());

/// u_n(x) = n^{d/p} profile(n (x - x0)) with profile supported in
/// { |s_i| <= support_radius }; evaluated through the nearest periodic image.
/// Rejects supports that would wrap the box at the smallest sampled index.
ScalarFamily concentration(const GridSpec& xspec,
                           std::function<cplx(std::span<const double>)> profile,
                           double support_radius, std::vector<double> center,
                           double p, std::vector<int> indices = default_ladder());

/// Smooth (t,x) window with exact closed-form partials, used to confine
/// transport waves; the induced commutator source is emitted, not hidden.
struct Window {
  std::function<cplx(std::span<const double>)> value;
  std::function<cplx(std::span<const double>)> dt;
  std::function<cplx(std::span<const double>)> dx;
};

struct TransportFamily {
  PhaseFamily family;  // u_n(t,x,y) = w(n (x - a(y) t)/L_x) * window
  PhaseFamily source;  // G_n = w_n * (dt W + a dx W) * y-window (zero if unwindowed)
  bool windowed = false;
};

/// Exact solutions of dt u + a(y) dx u = 0 (before windowing), oscillating at
/// scale n. Axes: x = (t, x), one or more y axes. `w` is 1-periodic with
/// frequency content within |m| <= w_max_mode.
TransportFamily transport_wave(const GridSpec& spec, const ScalarField& a_of_y,
                               std::function<cplx(double)> w, long w_max_mode,
                               const std::optional<Window>& window,
                               const std::optional<ScalarField>& y_window,
                               std::vector<int> indices);

// ---- truncation and bands -------------------------------------------------------

/// T_l: keep values with |u| <= l, zero the rest (zeroed, not clamped).
ScalarField truncate(const ScalarField& u, double l);
PhaseSpaceField truncate(const PhaseSpaceField& u, double l);

/// Band selection: keep values with l < |u| <= l+1 (ties to the lower band).
ScalarField band(const ScalarField& u, long l);
PhaseSpaceField band(const PhaseSpaceField& u, long l);

// ---- truncation tail report -----------------------------------------------------

struct TailRow {
  double l = 0.0;
  double sup_tail = 0.0;    // sup_n || u_n - T_l u_n ||_1
  double sup_holder = 0.0;  // sup_n meas(|u_n| > l)^{1/p'} ||u_n||_p
};

std::vector<TailRow> tail_report(const ScalarFamily& fam, std::span<const double> l_values);
std::vector<TailRow> tail_report(const PhaseFamily& fam, std::span<const double> l_values);

/// Assumption-b surrogate: per index n, the anisotropic dual-space norm
/// integral of the source, int_y || G_n(.,y) ||_{W^{s beta, q}(x)} dy.
std::vector<double> dual_sobolev_report(const PhaseFamily& G, double s,
                                        const Anisotropy& aniso, double q);

}  // namespace defectlab
