// grid.hpp — periodic sampled complex fields and their spectral transforms.
//
// Conventions (fixed once, used everywhere):
//   * Box [0, L_i) per axis, N_i equidistant samples, N_i even and >= 4.
//   * Forward transform carries 1/prod(N_i); coefficient at integer frequency
//     tuple k equals (1/prod N) sum_x f(x) e^{-2 pi i k.x/L}.
//   * Physical frequency along axis i is k/L_i with k in [-N_i/2, N_i/2).
//   * Quadrature is the uniform-weight periodic trapezoid rule with cell
//     volume prod(L_i/N_i); Plancherel then reads
//     ||f||_2^2 = prod(L_i) * sum_k |c_k|^2.
//
// A ScalarField lives on the x axes only (dim_y == 0); a PhaseSpaceField
// lives on the product of x and y axes, stored row-major with the y block
// contiguous per x point.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace defectlab {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Axis layout of a periodic box: x axes first, then y (velocity) axes.
class GridSpec {
 public:
  GridSpec() = default;
  GridSpec(std::vector<double> extent, std::vector<std::size_t> samples,
           std::size_t dim_x);

  static GridSpec x_grid(std::vector<double> extent,
                         std::vector<std::size_t> samples);
  static GridSpec phase_grid(std::vector<double> extent_x,
                             std::vector<std::size_t> samples_x,
                             std::vector<double> extent_y,
                             std::vector<std::size_t> samples_y);

  std::size_t dim() const { return extent_.size(); }
  std::size_t dim_x() const { return dim_x_; }
  std::size_t dim_y() const { return extent_.size() - dim_x_; }

  double extent(std::size_t axis) const { return extent_[axis]; }
  std::size_t samples(std::size_t axis) const { return samples_[axis]; }
  const std::vector<double>& extents() const { return extent_; }
  const std::vector<std::size_t>& sample_counts() const { return samples_; }

  std::size_t total() const;    // all axes
  std::size_t x_total() const;  // x axes only
  std::size_t y_total() const;  // y axes only (1 when dim_y == 0)

  double cell_volume() const;    // prod over all axes of L_i/N_i
  double x_cell_volume() const;  // x axes only
  double y_cell_volume() const;  // y axes only (1 when dim_y == 0)
  double x_volume() const;       // prod of x extents
  double y_volume() const;

  double step(std::size_t axis) const { return extent_[axis] / double(samples_[axis]); }
  double coord(std::size_t axis, std::size_t idx) const { return step(axis) * double(idx); }

  /// Signed integer frequency for storage index idx along an axis:
  /// idx < N/2 -> idx, else idx - N (so k spans [-N/2, N/2)).
  long freq_index(std::size_t axis, std::size_t idx) const;
  /// Physical frequency k/L.
  double freq(std::size_t axis, std::size_t idx) const;

  GridSpec x_only() const;
  GridSpec y_only() const;

  bool operator==(const GridSpec& o) const {
    return dim_x_ == o.dim_x_ && extent_ == o.extent_ && samples_ == o.samples_;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }

  /// Decode a flat row-major index (over the given axis range) into per-axis
  /// indices, written to `out` (size = end - begin).
  void decode(std::size_t flat, std::size_t axis_begin, std::size_t axis_end,
              std::size_t* out) const;

 private:
  std::vector<double> extent_;
  std::vector<std::size_t> samples_;
  std::size_t dim_x_ = 0;
};

/// Complex samples over the x axes of a spec (dim_y must be 0).
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec);
  ScalarField(GridSpec spec, std::vector<cplx> values);

  /// Sample a closed form f(coords) on the grid.
  static ScalarField sample(const GridSpec& spec,
                            const std::function<cplx(std::span<const double>)>& f);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return v_.size(); }
  std::span<const cplx> values() const { return v_; }
  std::vector<cplx>& data() { return v_; }
  const std::vector<cplx>& data() const { return v_; }
  cplx operator[](std::size_t i) const { return v_[i]; }
  cplx& operator[](std::size_t i) { return v_[i]; }

  bool all_finite() const;

 private:
  GridSpec spec_;
  std::vector<cplx> v_;
};

/// Spectral coefficients over the x frequency lattice, FFT storage order.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(GridSpec spec, std::vector<cplx> coeffs);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return c_.size(); }
  std::span<const cplx> coeffs() const { return c_; }
  std::vector<cplx>& data() { return c_; }
  const std::vector<cplx>& data() const { return c_; }

  /// Coefficient at a signed integer frequency tuple.
  cplx at(std::span<const long> k) const;
  cplx& at_mut(std::span<const long> k);

  /// Weighted l2 norm matching the physical L2 norm (Plancherel).
  double l2_norm() const;

 private:
  GridSpec spec_;
  std::vector<cplx> c_;
};

/// Complex samples over x-grid x y-grid (row-major, y fastest).
class PhaseSpaceField {
 public:
  PhaseSpaceField() = default;
  explicit PhaseSpaceField(GridSpec spec);
  PhaseSpaceField(GridSpec spec, std::vector<cplx> values);

  static PhaseSpaceField sample(
      const GridSpec& spec,
      const std::function<cplx(std::span<const double> x, std::span<const double> y)>& f);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return v_.size(); }
  std::span<const cplx> values() const { return v_; }
  std::vector<cplx>& data() { return v_; }
  const std::vector<cplx>& data() const { return v_; }
  cplx operator[](std::size_t i) const { return v_[i]; }
  cplx& operator[](std::size_t i) { return v_[i]; }

  cplx at(std::size_t xflat, std::size_t yflat) const {
    return v_[xflat * spec_.y_total() + yflat];
  }

  bool all_finite() const;

 private:
  GridSpec spec_;
  std::vector<cplx> v_;
};

// ---- transforms -------------------------------------------------------------

SpectralField forward_transform(const ScalarField& f);
ScalarField inverse_transform(const SpectralField& F);

/// y-direction forward transform of a phase-space field: returns, per x point,
/// the y-lattice coefficients (same layout, coefficient convention 1/prod(Ny)).
PhaseSpaceField forward_transform_y(const PhaseSpaceField& f);

// ---- norms and quadrature ---------------------------------------------------

/// Optional axis-aligned sub-box [lo_i, hi_i) used to restrict norms.
struct Region {
  std::vector<double> lo;
  std::vector<double> hi;
};

double lp_norm(const ScalarField& f, double p,
               const std::optional<Region>& region = std::nullopt);
double lp_norm(const PhaseSpaceField& f, double p,
               const std::optional<Region>& region = std::nullopt);

/// Mixed norm: inner L^p in x per y point, outer L^q over y.
double mixed_norm(const PhaseSpaceField& f, double p_inner_x, double q_outer_y);

/// Quadrature of the raw integrand (no absolute value).
cplx integrate(const ScalarField& f);
cplx integrate(const PhaseSpaceField& f);

/// Quadrature inner product <f, g> = integral of f * conj(g).
cplx inner(const ScalarField& f, const ScalarField& g);
cplx inner(const PhaseSpaceField& f, const PhaseSpaceField& g);

// ---- pointwise algebra ------------------------------------------------------

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(cplx s, const ScalarField& a);
ScalarField multiply(const ScalarField& a, const ScalarField& b);
ScalarField conjugate(const ScalarField& a);

PhaseSpaceField operator+(const PhaseSpaceField& a, const PhaseSpaceField& b);
PhaseSpaceField operator-(const PhaseSpaceField& a, const PhaseSpaceField& b);
PhaseSpaceField operator*(cplx s, const PhaseSpaceField& a);
PhaseSpaceField multiply(const PhaseSpaceField& a, const PhaseSpaceField& b);
PhaseSpaceField conjugate(const PhaseSpaceField& a);

/// Broadcast products against the x-part or y-part of a phase-space field.
PhaseSpaceField multiply_x(const PhaseSpaceField& a, const ScalarField& bx);
PhaseSpaceField multiply_y(const PhaseSpaceField& a, const ScalarField& by);

/// Embed an x-field as a phase-space field constant in y.
PhaseSpaceField broadcast_x(const ScalarField& fx, const GridSpec& phase_spec);
/// Tensor product fx(x) * fy(y) on a phase grid.
PhaseSpaceField tensor(const ScalarField& fx, const ScalarField& fy,
                       const GridSpec& phase_spec);

// ---- misc -------------------------------------------------------------------

/// Spectral translation: coefficient k picks up e^{-2 pi i k.h/L}; exact on
/// band-limited fields, h need not be a grid multiple.
ScalarField translate(const ScalarField& f, std::span<const double> h);

/// Deterministic RNG (engine + explicit Box-Muller so output is
/// implementation-independent).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
  std::uint64_t next_u64();
  double uniform();             // [0, 1)
  double uniform(double a, double b);
  double normal();
  cplx cnormal();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Random band-limited field: independent complex-Gaussian coefficients on
/// modes with |k_i| <= max_mode, zero elsewhere. When `highpass_quasi_norm`
/// is set, modes with |k/L|_beta-style radius below it are zeroed by the
/// caller instead (see multipliers); here the plain low-mode box is used.
ScalarField random_band_limited(const GridSpec& spec, Rng& rng, long max_mode,
                                bool zero_mean = false);

}  // namespace defectlab
