#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "defectlab/anisotropy.hpp"
#include "defectlab/grid.hpp"
#include "support.hpp"

using namespace defectlab;
using namespace testsupport;

TEST_CASE("derived exponent l") {
  // isotropic d <= 2 gives l = 2 and the Euclidean sphere
  CHECK(Anisotropy::make({1.0}).ell == 2);
  CHECK(Anisotropy::make({1.0, 1.0}).ell == 2);
  // parabolic
  CHECK(Anisotropy::make({1.0, 2.0}).ell == 2);
  // l beta = (2, 3): 2 even, 3 > d = 2
  CHECK(Anisotropy::make({2.0, 3.0}).ell == 1);
  CHECK_THROWS_AS(Anisotropy::make({-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Anisotropy::make({}), std::invalid_argument);
}

TEST_CASE("quasi-norm closed forms") {
  const Anisotropy iso = Anisotropy::make({1.0, 1.0});
  CHECK(quasi_norm(std::vector<double>{3.0, 4.0}, iso) ==
        doctest::Approx(5.0).epsilon(1e-14));

  const Anisotropy par = Anisotropy::make({1.0, 2.0});
  CHECK(quasi_norm(std::vector<double>{4.0, 2.0}, par) ==
        doctest::Approx(std::sqrt(32.0)).epsilon(1e-14));

  CHECK(quasi_norm(std::vector<double>{0.0, 0.0}, iso) == 0.0);
}

TEST_CASE("quasi-norm anisotropic scaling property") {
  Rng rng(31);
  for (const auto& beta : {std::vector<double>{1, 1}, std::vector<double>{1, 2},
                           std::vector<double>{2, 3}}) {
    const Anisotropy aniso = Anisotropy::make(beta);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> xi{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      if (std::abs(xi[0]) + std::abs(xi[1]) < 1e-6) continue;
      const double lam = 0.7;
      CHECK(rel_diff(quasi_norm(dilate(xi, lam, aniso), aniso),
                     lam * quasi_norm(xi, aniso)) < 1e-12);
    }
  }
}

TEST_CASE("projection closed forms") {
  const Anisotropy iso = Anisotropy::make({1.0, 1.0});
  const auto eta = project(std::vector<double>{3.0, 4.0}, iso);
  CHECK(eta[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(eta[1] == doctest::Approx(0.8).epsilon(1e-14));

  const Anisotropy par = Anisotropy::make({1.0, 2.0});
  const auto eta2 = project(std::vector<double>{4.0, 2.0}, par);
  // eta = (4/sqrt(32), 2/32^{1/4}); check eta1^2 + eta2^4 = 1
  CHECK(eta2[0] == doctest::Approx(4.0 / std::sqrt(32.0)).epsilon(1e-14));
  CHECK(eta2[1] == doctest::Approx(2.0 / std::pow(32.0, 0.25)).epsilon(1e-14));
  CHECK(eta2[0] * eta2[0] + std::pow(eta2[1], 4.0) ==
        doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(project(std::vector<double>{0.0, 0.0}, iso), std::invalid_argument);
}

TEST_CASE("projection is dilation invariant and idempotent") {
  Rng rng(77);
  for (const auto& beta : {std::vector<double>{1, 1}, std::vector<double>{1, 2},
                           std::vector<double>{2, 3}}) {
    const Anisotropy aniso = Anisotropy::make(beta);
    for (int t = 0; t < 500; ++t) {
      std::vector<double> xi{rng.uniform(-3, 3), rng.uniform(-3, 3)};
      if (std::abs(xi[0]) + std::abs(xi[1]) < 1e-6) continue;
      const auto eta = project(xi, aniso);
      double s = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        s += std::pow(std::abs(eta[i]), double(aniso.ell) * beta[i]);
      CHECK(std::abs(s - 1.0) < 1e-12);
      const auto again = project(eta, aniso);
      CHECK(std::abs(again[0] - eta[0]) < 1e-12);
      CHECK(std::abs(again[1] - eta[1]) < 1e-12);
      const double lam = std::pow(10.0, rng.uniform(-3, 3));
      const auto moved = project(dilate(xi, lam, aniso), aniso);
      CHECK(std::abs(moved[0] - eta[0]) < 1e-12);
      CHECK(std::abs(moved[1] - eta[1]) < 1e-12);
    }
  }
}

TEST_CASE("cutoff profile shape") {
  const Anisotropy iso = Anisotropy::make({1.0, 1.0});
  CHECK(cutoff_theta(std::vector<double>{0.0, 0.0}, iso) == doctest::Approx(1.0));
  CHECK(cutoff_theta(std::vector<double>{0.5, 0.5}, iso) == doctest::Approx(1.0));
  CHECK(cutoff_theta(std::vector<double>{3.0, 0.0}, iso) == doctest::Approx(0.0));

  // monotone non-increasing along random rays
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    const double angle = rng.uniform(0.0, kTwoPi);
    double prev = 1.0;
    for (double r = 0.1; r < 3.0; r += 0.05) {
      const std::vector<double> xi{r * std::cos(angle), r * std::sin(angle)};
      const double v = cutoff_theta(xi, iso);
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("manifold samples live on the manifold") {
  for (const auto& beta : {std::vector<double>{1, 1}, std::vector<double>{1, 2}}) {
    const Anisotropy aniso = Anisotropy::make(beta);
    for (const auto& eta : manifold_samples(aniso, 64)) {
      double s = 0.0;
      for (std::size_t i = 0; i < 2; ++i)
        s += std::pow(std::abs(eta[i]), double(aniso.ell) * beta[i]);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
  const Anisotropy line = Anisotropy::make({1.0});
  const auto pts = manifold_samples(line, 10);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0][0] == doctest::Approx(1.0));
  CHECK(pts[1][0] == doctest::Approx(-1.0));
}

TEST_CASE("angle parametrization of P^2") {
  const Anisotropy par = Anisotropy::make({1.0, 2.0});
  for (double phi : {0.1, 1.3, 2.9, 4.2, 5.8}) {
    const auto eta = manifold_point_at_angle(phi, par);
    CHECK(std::abs(std::atan2(eta[1], eta[0]) -
                   std::remainder(phi, kTwoPi)) < 1e-10);
    const double s = std::pow(std::abs(eta[0]), 2.0) + std::pow(std::abs(eta[1]), 4.0);
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
}
