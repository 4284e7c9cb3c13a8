// Shared test-side oracles: direct O(N^2) DFT summation, fine 1D quadrature,
// and approx helpers. These stay independent of the library's transform and
// quadrature paths so the tests can certify them.

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "defectlab/grid.hpp"

namespace testsupport {

using defectlab::cplx;
using defectlab::kTwoPi;

// Direct evaluation of c_k = (1/N) sum_j f_j e^{-2 pi i k j / N} (1D).
inline std::vector<cplx> direct_dft_1d(std::span<const cplx> f) {
  const std::size_t n = f.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j)
      acc += f[j] * std::polar(1.0, -kTwoPi * double(k) * double(j) / double(n));
    out[k] = acc / double(n);
  }
  return out;
}

// Direct 2D DFT oracle, row-major input, same normalization as the library.
inline std::vector<cplx> direct_dft_2d(std::span<const cplx> f, std::size_t n0,
                                       std::size_t n1) {
  std::vector<cplx> out(n0 * n1);
  for (std::size_t k0 = 0; k0 < n0; ++k0)
    for (std::size_t k1 = 0; k1 < n1; ++k1) {
      cplx acc{0.0, 0.0};
      for (std::size_t j0 = 0; j0 < n0; ++j0)
        for (std::size_t j1 = 0; j1 < n1; ++j1)
          acc += f[j0 * n1 + j1] *
                 std::polar(1.0, -kTwoPi * (double(k0 * j0) / double(n0) +
                                            double(k1 * j1) / double(n1)));
      out[k0 * n1 + k1] = acc / double(n0 * n1);
    }
  return out;
}

// Composite-Simpson quadrature of f over [a, b] on a fine grid (test oracle
// for continuum integrals such as rho-hat).
inline cplx fine_integral(const std::function<cplx(double)>& f, double a, double b,
                          int panels = 4096) {
  const double h = (b - a) / double(panels);
  cplx acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i)
    acc += f(a + h * double(i)) * ((i % 2) ? 4.0 : 2.0);
  return acc * (h / 3.0);
}

inline double rel_diff(double a, double b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

inline double rel_diff(cplx a, cplx b) {
  const double m = std::max(std::abs(a), std::abs(b));
  return m == 0.0 ? 0.0 : std::abs(a - b) / m;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs(std::span<const cplx> a) {
  double worst = 0.0;
  for (const cplx& z : a) worst = std::max(worst, std::abs(z));
  return worst;
}

}  // namespace testsupport
