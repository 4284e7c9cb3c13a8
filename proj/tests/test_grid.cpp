#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "defectlab/grid.hpp"
#include "support.hpp"

using namespace defectlab;
using namespace testsupport;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("grid spec enforces its invariants") {
  CHECK_THROWS_AS(GridSpec::x_grid({1.0}, {15}), std::invalid_argument);  // odd
  CHECK_THROWS_AS(GridSpec::x_grid({1.0}, {2}), std::invalid_argument);   // < 4
  CHECK_THROWS_AS(GridSpec::x_grid({0.0}, {8}), std::invalid_argument);   // L <= 0
  CHECK_THROWS_AS(GridSpec::x_grid({1.0, 1.0}, {8}), std::invalid_argument);

  const GridSpec spec = GridSpec::x_grid({2.0}, {8});
  // frequency lattice spans [-N/2, N/2)
  std::vector<long> ks;
  for (std::size_t j = 0; j < 8; ++j) ks.push_back(spec.freq_index(0, j));
  CHECK(ks == std::vector<long>{0, 1, 2, 3, -4, -3, -2, -1});
  CHECK(spec.freq(0, 1) == doctest::Approx(0.5));  // k/L
}

TEST_CASE("forward transform: DC and pure modes") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {16});
  const ScalarField one(spec, std::vector<cplx>(16, cplx{1.0, 0.0}));
  const SpectralField F = forward_transform(one);
  CHECK(std::abs(F.coeffs()[0] - cplx{1.0, 0.0}) < 1e-14);
  for (std::size_t i = 1; i < 16; ++i) CHECK(std::abs(F.coeffs()[i]) < 1e-14);

  const ScalarField mode = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * 3.0 * x[0]);
  });
  const SpectralField M = forward_transform(mode);
  const std::vector<long> k3{3};
  CHECK(std::abs(M.at(k3) - cplx{1.0, 0.0}) < 1e-13);
  double off = 0.0;
  for (std::size_t i = 0; i < 16; ++i)
    if (i != 3) off = std::max(off, std::abs(M.coeffs()[i]));
  CHECK(off < 1e-13);
}

TEST_CASE("forward transform matches the direct summation oracle") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  Rng rng(101);
  std::vector<cplx> vals(64);
  for (auto& v : vals) v = rng.cnormal();
  const ScalarField f(spec, vals);
  const SpectralField F = forward_transform(f);
  const auto oracle = direct_dft_1d(vals);
  CHECK(max_abs_diff(F.coeffs(), oracle) < 1e-12 * max_abs(oracle));

  const ScalarField back = inverse_transform(F);
  CHECK(max_abs_diff(back.values(), vals) < 1e-12 * max_abs(vals));
}

TEST_CASE("2D transform matches the direct oracle") {
  const GridSpec spec = GridSpec::x_grid({1.0, 2.0}, {8, 12});
  Rng rng(7);
  std::vector<cplx> vals(8 * 12);
  for (auto& v : vals) v = rng.cnormal();
  const SpectralField F = forward_transform(ScalarField(spec, vals));
  const auto oracle = direct_dft_2d(vals, 8, 12);
  CHECK(max_abs_diff(F.coeffs(), oracle) < 1e-12 * max_abs(oracle));
}

TEST_CASE("inverse transform basics") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {16});
  const SpectralField zero(spec, std::vector<cplx>(16, cplx{0.0, 0.0}));
  const ScalarField back = inverse_transform(zero);
  for (const cplx& z : back.values()) CHECK(std::abs(z) == 0.0);

  // single coefficient at k -> sampled plane wave
  std::vector<cplx> c(16, cplx{0.0, 0.0});
  SpectralField single(spec, std::move(c));
  const std::vector<long> k{5};
  single.at_mut(k) = cplx{1.0, 0.0};
  const ScalarField wave = inverse_transform(single);
  for (std::size_t j = 0; j < 16; ++j) {
    const cplx expect = std::polar(1.0, kTwoPi * 5.0 * double(j) / 16.0);
    CHECK(std::abs(wave[j] - expect) < 1e-14);
  }
}

TEST_CASE("Plancherel holds to 1e-12 up to 256 per axis") {
  Rng rng(2024);
  for (const GridSpec& spec :
       {GridSpec::x_grid({1.0}, {256}), GridSpec::x_grid({1.5, 0.75}, {256, 256})}) {
    const ScalarField f = random_band_limited(spec, rng, 20);
    const SpectralField F = forward_transform(f);
    CHECK(rel_diff(lp_norm(f, 2.0), F.l2_norm()) < 1e-12);
    const ScalarField g = inverse_transform(F);
    CHECK(max_abs_diff(f.values(), g.values()) < 1e-12 * max_abs(f.values()));
  }
}

TEST_CASE("lp_norm closed forms and rejection") {
  const GridSpec spec = GridSpec::x_grid({2.0, 3.0}, {16, 16});  // volume 6
  const ScalarField one(spec, std::vector<cplx>(spec.total(), cplx{1.0, 0.0}));
  CHECK(lp_norm(one, 2.0) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-13));
  CHECK(lp_norm(one, kInf) == doctest::Approx(1.0));

  const GridSpec unit = GridSpec::x_grid({1.0}, {32});
  const ScalarField wave = ScalarField::sample(unit, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * x[0]);
  });
  CHECK(lp_norm(wave, 2.0) == doctest::Approx(1.0).epsilon(1e-13));

  CHECK_THROWS_AS(lp_norm(one, 0.5), std::invalid_argument);
}

TEST_CASE("mixed norm of a separable field is the product of 1D norms") {
  const GridSpec spec = GridSpec::phase_grid({1.0}, {64}, {2.0}, {64});
  const GridSpec xs = spec.x_only(), ys = spec.y_only();
  const ScalarField fx = ScalarField::sample(xs, [](std::span<const double> x) {
    return cplx{1.0 + 0.5 * std::sin(kTwoPi * x[0]), 0.2 * std::cos(kTwoPi * x[0])};
  });
  const ScalarField gy = ScalarField::sample(ys, [](std::span<const double> y) {
    return cplx{std::cos(kTwoPi * y[0] / 2.0), 0.0};
  });
  const PhaseSpaceField f = tensor(fx, gy, spec);
  // || . ||_{L^2_y L^4_x} = ||fx||_4 ||gy||_2
  const double expect = lp_norm(fx, 4.0) * lp_norm(gy, 2.0);
  CHECK(rel_diff(mixed_norm(f, 4.0, 2.0), expect) < 1e-10);
}

TEST_CASE("region-restricted norms") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {64});
  const ScalarField one(spec, std::vector<cplx>(64, cplx{1.0, 0.0}));
  Region K{{0.25}, {0.75}};
  // indicator quadrature over [0.25, 0.75): 32 cells of width 1/64
  CHECK(lp_norm(one, 1.0, K) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("translation is spectral and exact") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {32});
  Rng rng(5);
  const ScalarField f = random_band_limited(spec, rng, 6);

  const std::vector<double> h0{0.0};
  CHECK(max_abs_diff(translate(f, h0).values(), f.values()) < 1e-13);

  // plane wave picks up the phase e^{-2 pi i k h / L}
  const ScalarField wave = ScalarField::sample(spec, [](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * 4.0 * x[0]);
  });
  const std::vector<double> h{0.317};
  const ScalarField moved = translate(wave, h);
  const cplx phase = std::polar(1.0, -kTwoPi * 4.0 * 0.317);
  CHECK(max_abs_diff(moved.values(), (phase * wave).values()) < 1e-12);

  const std::vector<double> period{1.0};
  CHECK(max_abs_diff(translate(f, period).values(), f.values()) <
        1e-12 * max_abs(f.values()));

  // off-grid shift agrees with resampling the band-limited closed form
  const std::vector<double> hx{0.1234567};
  const ScalarField shifted = translate(wave, hx);
  const ScalarField expect = ScalarField::sample(spec, [&](std::span<const double> x) {
    return std::polar(1.0, kTwoPi * 4.0 * (x[0] - hx[0]));
  });
  CHECK(max_abs_diff(shifted.values(), expect.values()) < 1e-12);
}

TEST_CASE("finiteness check catches NaN") {
  const GridSpec spec = GridSpec::x_grid({1.0}, {8});
  ScalarField f(spec);
  CHECK(f.all_finite());
  f[3] = cplx{std::nan(""), 0.0};
  CHECK(!f.all_finite());
}

TEST_CASE("phase-space algebra broadcasts correctly") {
  const GridSpec spec = GridSpec::phase_grid({1.0}, {8}, {1.0}, {4});
  Rng rng(9);
  const ScalarField fx = random_band_limited(spec.x_only(), rng, 2);
  const ScalarField gy = random_band_limited(spec.y_only(), rng, 1);
  const PhaseSpaceField t = tensor(fx, gy, spec);
  for (std::size_t ix = 0; ix < 8; ++ix)
    for (std::size_t iy = 0; iy < 4; ++iy)
      CHECK(std::abs(t.at(ix, iy) - fx[ix] * gy[iy]) < 1e-15);

  const PhaseSpaceField b = broadcast_x(fx, spec);
  const PhaseSpaceField bx = multiply_y(b, gy);
  CHECK(max_abs_diff(bx.values(), t.values()) < 1e-15);
}

TEST_CASE("y-direction transform of a phase-space field") {
  const GridSpec spec = GridSpec::phase_grid({1.0}, {4}, {1.0}, {16});
  // u(x, y) = f(x) e^{2 pi i 3 y}: the y-spectrum is a delta at mode 3
  const PhaseSpaceField u = PhaseSpaceField::sample(
      spec, [](std::span<const double> x, std::span<const double> y) {
        return cplx{1.0 + x[0], 0.0} * std::polar(1.0, kTwoPi * 3.0 * y[0]);
      });
  const PhaseSpaceField uh = forward_transform_y(u);
  for (std::size_t ix = 0; ix < 4; ++ix) {
    CHECK(std::abs(uh.at(ix, 3) - cplx{1.0 + 0.25 * double(ix), 0.0}) < 1e-13);
    for (std::size_t iy = 0; iy < 16; ++iy)
      if (iy != 3) CHECK(std::abs(uh.at(ix, iy)) < 1e-13);
  }
}
