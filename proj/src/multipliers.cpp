#include "defectlab/multipliers.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace defectlab {

namespace {

bool needs_nyquist_mask(double alpha) {
  // even integers are conjugate-symmetric on the half-open lattice
  const double half = alpha / 2.0;
  return std::abs(half - std::round(half)) > 1e-9;
}

void check_op_field(const MultiplierOp& op, const GridSpec& fspec, const char* what) {
  if (op.spec != fspec)
    throw std::invalid_argument(std::string("multiplier/field grid mismatch in ") + what);
}

template <class Fn>
std::vector<cplx> build_table(const GridSpec& spec, Fn&& fn) {
  const std::size_t d = spec.dim_x();
  std::vector<cplx> table(spec.x_total());
  std::vector<std::size_t> idx(d);
  std::vector<double> xi(d);
  std::vector<std::uint8_t> nyq(d);
  for (std::size_t i = 0; i < table.size(); ++i) {
    spec.decode(i, 0, d, idx.data());
    for (std::size_t a = 0; a < d; ++a) {
      xi[a] = spec.freq(a, idx[a]);
      nyq[a] = std::uint8_t(spec.freq_index(a, idx[a]) == -long(spec.samples(a)) / 2);
    }
    table[i] = fn(std::span<const double>(xi), std::span<const std::uint8_t>(nyq));
  }
  return table;
}

}  // namespace

double MultiplierOp::sup() const {
  double m = 0.0;
  for (const cplx& z : table) m = std::max(m, std::abs(z));
  return m;
}

ScalarField apply(const MultiplierOp& op, const ScalarField& f) {
  check_op_field(op, f.spec(), "apply");
  SpectralField F = forward_transform(f);
  for (std::size_t i = 0; i < F.size(); ++i) F.data()[i] *= op.table[i];
  return inverse_transform(F);
}

ScalarField apply_spectrum(const MultiplierOp& op, const SpectralField& F) {
  check_op_field(op, F.spec(), "apply_spectrum");
  std::vector<cplx> c(F.coeffs().begin(), F.coeffs().end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= op.table[i];
  return inverse_transform(SpectralField(F.spec(), std::move(c)));
}

MultiplierOp compose(const MultiplierOp& a, const MultiplierOp& b) {
  check_op_field(a, b.spec, "compose");
  MultiplierOp out{a.spec, a.table, a.label + "*" + b.label};
  for (std::size_t i = 0; i < out.table.size(); ++i) out.table[i] *= b.table[i];
  return out;
}

MultiplierOp identity_op(const GridSpec& spec) {
  return MultiplierOp{spec.x_only(), std::vector<cplx>(spec.x_total(), cplx{1.0, 0.0}),
                      "id"};
}

MultiplierOp symbol_op(const SymbolOnManifold& psi, const Anisotropy& aniso,
                       const GridSpec& spec) {
  return MultiplierOp{spec.x_only(), extend_symbol(psi, aniso, spec), psi.label};
}

MultiplierOp derivative_op(const GridSpec& spec, std::span<const double> alpha,
                           int sign) {
  if (alpha.size() != spec.dim_x())
    throw std::invalid_argument("derivative_op: alpha rank mismatch");
  std::vector<double> a(alpha.begin(), alpha.end());
  auto table = build_table(spec, [&](std::span<const double> xi, std::span<const std::uint8_t> nyq) {
    cplx v{1.0, 0.0};
    for (std::size_t j = 0; j < xi.size(); ++j) {
      if (nyq[j] && needs_nyquist_mask(a[j])) return cplx{0.0, 0.0};
      v *= imag_power(xi[j], a[j], sign);
    }
    return v;
  });
  return MultiplierOp{spec.x_only(), std::move(table), "d^alpha"};
}

MultiplierOp smoothing_op(const GridSpec& spec, double gamma, const Anisotropy& aniso) {
  if (!(gamma > 0.0)) throw std::invalid_argument("smoothing_op: gamma must be > 0");
  auto table = build_table(spec, [&](std::span<const double> xi, std::span<const std::uint8_t>) {
    const double guard = 1.0 - cutoff_theta(xi, aniso);
    if (guard == 0.0) return cplx{0.0, 0.0};
    return cplx{guard * std::pow(quasi_norm(xi, aniso), -gamma), 0.0};
  });
  return MultiplierOp{spec.x_only(), std::move(table), "T^gamma"};
}

MultiplierOp bessel_op(const GridSpec& spec, double s, const Anisotropy& aniso) {
  const double l = double(aniso.ell);
  auto table = build_table(spec, [&](std::span<const double> xi, std::span<const std::uint8_t>) {
    const double qn = quasi_norm(xi, aniso);
    return cplx{std::pow(1.0 + std::pow(qn, l), s / l), 0.0};
  });
  return MultiplierOp{spec.x_only(), std::move(table), "bessel"};
}

MultiplierOp projected_power_op(const GridSpec& spec, const Anisotropy& aniso,
                                std::span<const double> alpha, int sign,
                                double t_exponent, const SymbolOnManifold* psi) {
  if (alpha.size() != spec.dim_x())
    throw std::invalid_argument("projected_power_op: alpha rank mismatch");
  std::vector<double> a(alpha.begin(), alpha.end());
  auto table = build_table(spec, [&](std::span<const double> xi, std::span<const std::uint8_t> nyq) {
    for (std::size_t j = 0; j < xi.size(); ++j)
      if (nyq[j] && needs_nyquist_mask(a[j])) return cplx{0.0, 0.0};
    const double guard = 1.0 - cutoff_theta(xi, aniso);
    if (guard == 0.0) return cplx{0.0, 0.0};
    const auto eta = project(xi, aniso);
    cplx v{guard, 0.0};
    if (psi) v *= psi->eval(eta);
    for (std::size_t j = 0; j < eta.size(); ++j) v *= imag_power(eta[j], a[j], sign);
    if (t_exponent != 0.0) v *= std::pow(quasi_norm(xi, aniso), -t_exponent);
    return v;
  });
  return MultiplierOp{spec.x_only(), std::move(table), "projected_power"};
}

ScalarField fractional_derivative(const ScalarField& f, std::span<const double> alpha) {
  return apply(derivative_op(f.spec(), alpha, +1), f);
}

ScalarField smoothing_T(const ScalarField& f, double gamma, const Anisotropy& aniso) {
  return apply(smoothing_op(f.spec(), gamma, aniso), f);
}

double sobolev_norm(const ScalarField& f, double s, const Anisotropy& aniso, double p) {
  if (s == 0.0) return lp_norm(f, p);
  return lp_norm(apply(bessel_op(f.spec(), s, aniso), f), p);
}

ScalarField commutator_apply(const ScalarField& b, const MultiplierOp& psi_op,
                             const ScalarField& f) {
  return apply(psi_op, multiply(b, f)) - multiply(b, apply(psi_op, f));
}

ScalarField random_high_pass(const GridSpec& spec, Rng& rng, const Anisotropy& aniso,
                             double min_radius, long max_mode) {
  SpectralField F(spec.x_only(), std::vector<cplx>(spec.x_total(), cplx{0.0, 0.0}));
  const std::size_t d = spec.dim_x();
  std::vector<std::size_t> idx(d);
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < F.size(); ++i) {
    spec.decode(i, 0, d, idx.data());
    bool inside = true;
    for (std::size_t a = 0; a < d; ++a) {
      const long k = spec.freq_index(a, idx[a]);
      xi[a] = spec.freq(a, idx[a]);
      if (std::labs(k) > max_mode) inside = false;
    }
    if (!inside) continue;
    if (quasi_norm(xi, aniso) < min_radius) continue;
    F.data()[i] = rng.cnormal();
  }
  return inverse_transform(F);
}

}  // namespace defectlab
