#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "defectlab/multipliers.hpp"
#include "support.hpp"

using namespace defectlab;
using namespace testsupport;

TEST_CASE("identity table and eigenfunction property") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {32});
  Rng rng(11);
  const ScalarField f = random_band_limited(spec, rng, 8);
  CHECK(max_abs_diff(apply(identity_op(spec), f).values(), f.values()) < 1e-13);

  // a plane wave is an eigenfunction with eigenvalue table[k]
  const Anisotropy iso = Anisotropy::make({1.0});
  const MultiplierOp op = symbol_op(named_symbol("sign_eta1", iso), iso, spec);
  const ScalarField wave = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, -kTwoPi * 7.0 * x[0]);
  });
  const ScalarField out = apply(op, wave);
  CHECK(max_abs_diff(out.values(), (cplx{-1.0, 0.0} * wave).values()) < 1e-12);
}

TEST_CASE("L2 contraction bound on random fields") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const Anisotropy iso = Anisotropy::make({1.0});
  const MultiplierOp op = symbol_op(named_symbol("sign_eta1", iso), iso, spec);
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const ScalarField f = random_band_limited(spec, rng, 24);
    CHECK(lp_norm(apply(op, f), 2.0) <= op.sup() * lp_norm(f, 2.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("multipliers commute") {
  const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {16, 16});
  const Anisotropy iso = Anisotropy::make({1.0, 1.0});
  const MultiplierOp a = symbol_op(named_symbol("eta1", iso), iso, spec);
  const MultiplierOp b = derivative_op(spec, std::vector<double>{0.0, 1.0});
  Rng rng(2);
  const ScalarField f = random_band_limited(spec, rng, 5);
  CHECK(max_abs_diff(apply(a, apply(b, f)).values(), apply(b, apply(a, f)).values()) <
        1e-12 * max_abs(f.values()));
}

TEST_CASE("fractional derivative closed forms and composition") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const ScalarField wave = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * x[0]);
  });
  const std::vector<double> a1{1.0};
  const ScalarField dw = fractional_derivative(wave, a1);
  CHECK(max_abs_diff(dw.values(), (cplx{0.0, kTwoPi} * wave).values()) < 1e-12);

  Rng rng(41);
  const ScalarField f = random_band_limited(spec, rng, 16, /*zero_mean=*/true);
  const std::vector<double> a2{2.0}, ah{0.5};
  CHECK(max_abs_diff(fractional_derivative(f, a2).values(),
                     fractional_derivative(fractional_derivative(f, a1), a1).values()) <
        1e-10 * max_abs(fractional_derivative(f, a2).values()));
  CHECK(max_abs_diff(fractional_derivative(fractional_derivative(f, ah), ah).values(),
                     fractional_derivative(f, a1).values()) <
        1e-10 * max_abs(fractional_derivative(f, a1).values()));
}

TEST_CASE("smoothing operator kills low modes and scales high ones") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const Anisotropy iso = Anisotropy::make({1.0});
  // |k/L|_beta = 1 for the k = 1 mode: inside the unit ball, killed by 1-theta
  const ScalarField low = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * x[0]);
  });
  CHECK(max_abs(smoothing_T(low, 1.0, iso).values()) < 1e-13);

  // |k/L|_beta = 8 >= 2: scaled by 8^{-gamma}
  const ScalarField high = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * 8.0 * x[0]);
  });
  for (double gamma : {0.5, 1.0, 2.0}) {
    const ScalarField out = smoothing_T(high, gamma, iso);
    CHECK(max_abs_diff(out.values(),
                       (cplx{std::pow(8.0, -gamma), 0.0} * high).values()) < 1e-12);
  }
}

TEST_CASE("chain identity: derivative of the smoothing operator is a projected power") {
  // d^{gamma beta_j} T^gamma = multiplier with (1-theta)(2 pi i pi_P(xi)_j)^{gamma beta_j}
  const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {64, 64});
  const Anisotropy par = Anisotropy::make({1.0, 2.0});
  Rng rng(4);
  for (double gamma : {0.5, 1.0, 2.0}) {
    for (std::size_t j = 0; j < 2; ++j) {
      std::vector<double> alpha{0.0, 0.0};
      alpha[j] = gamma * par.beta[j];
      const MultiplierOp direct = projected_power_op(spec, par, alpha, +1, 0.0);
      for (int t = 0; t < 5; ++t) {
        const ScalarField f = random_band_limited(spec, rng, 12);
        const ScalarField two_step =
            fractional_derivative(smoothing_T(f, gamma, par), alpha);
        const ScalarField one_step = apply(direct, f);
        const double scale = std::max(max_abs(one_step.values()), 1e-30);
        CHECK(max_abs_diff(two_step.values(), one_step.values()) < 1e-10 * scale);
      }
    }
  }
}

TEST_CASE("anisotropic Sobolev norm") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const Anisotropy iso = Anisotropy::make({1.0});
  Rng rng(8);
  const ScalarField f = random_band_limited(spec, rng, 10);
  CHECK(rel_diff(sobolev_norm(f, 0.0, iso, 2.5), lp_norm(f, 2.5)) < 1e-13);

  const ScalarField wave = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * 5.0 * x[0]);
  });
  // (1 + |k/L|_beta^l)^{1/l} at k = 5, l = 2
  const double expect = std::sqrt(1.0 + 25.0);
  CHECK(rel_diff(sobolev_norm(wave, 1.0, iso, 2.0), expect) < 1e-12);
}

TEST_CASE("smoothing operator boundedness is grid stable") {
  const Anisotropy par = Anisotropy::make({1.0, 2.0});
  Rng rng(14);
  std::vector<double> worst;
  for (std::size_t N : {64, 128}) {
    const GridSpec spec = GridSpec::x_grid({1.0, 1.0}, {N, N});
    double w = 0.0;
    for (double p : {1.5, 2.0, 3.0}) {
      for (int t = 0; t < 15; ++t) {
        const ScalarField f = random_high_pass(spec, rng, par, 2.0, long(N) / 4);
        const double den = lp_norm(f, p);
        if (den > 0.0)
          w = std::max(w, sobolev_norm(smoothing_T(f, 1.0, par), 1.0, par, p) / den);
      }
    }
    worst.push_back(w);
  }
  CHECK(worst[1] <= 1.2 * worst[0]);
  CHECK(worst[0] <= 1.2 * worst[1]);
}

TEST_CASE("commutator edge cases") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const Anisotropy iso = Anisotropy::make({1.0});
  const MultiplierOp sgn = symbol_op(named_symbol("sign_eta1", iso), iso, spec);
  Rng rng(6);
  const ScalarField f = random_band_limited(spec, rng, 12);

  // constant b commutes with any multiplier
  const ScalarField bconst(spec, std::vector<cplx>(64, cplx{2.5, -0.5}));
  CHECK(max_abs(commutator_apply(bconst, sgn, f).values()) < 1e-12 * max_abs(f.values()));

  // constant multiplier table commutes with any b
  MultiplierOp cop = identity_op(spec);
  for (auto& z : cop.table) z *= cplx{0.7, 0.3};
  const ScalarField b = ScalarField::sample(spec, [](std::span<const double> x) {
    return cplx{std::exp(-8.0 * (x[0] - 0.5) * (x[0] - 0.5)), 0.0};
  });
  CHECK(max_abs(commutator_apply(b, cop, f).values()) < 1e-12 * max_abs(f.values()));
}

TEST_CASE("Nyquist row handling for odd derivatives") {
  // odd-order derivative tables zero the unpaired k = -N/2 row, so real
  // fields stay conjugate-symmetric (real output for real input)
  const GridSpec spec = GridSpec::x_grid({1.0}, {16});
  ScalarField f(spec);
  Rng rng(19);
  for (auto& z : f.data()) z = cplx{rng.normal(), 0.0};
  const ScalarField df = fractional_derivative(f, std::vector<double>{1.0});
  double imag_part = 0.0;
  for (const cplx& z : df.values()) imag_part = std::max(imag_part, std::abs(z.imag()));
  CHECK(imag_part < 1e-11 * (1.0 + max_abs(df.values())));

  // even orders keep the row: second derivative of the Nyquist mode survives
  const ScalarField nyq = ScalarField::sample(spec, [](std::span<const double> x) {
    return cplx{std::cos(kTwoPi * 8.0 * x[0]), 0.0};
  });
  const ScalarField d2 = fractional_derivative(nyq, std::vector<double>{2.0});
  CHECK(max_abs(d2.values()) > 1.0);  // not masked
}
