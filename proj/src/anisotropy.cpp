#include "defectlab/anisotropy.hpp"

#include <cmath>
#include <stdexcept>

#include "defectlab/grid.hpp"

namespace defectlab {

namespace {
constexpr double kEps = 1e-9;

bool is_even_integer(double x) {
  const double half = x / 2.0;
  return std::abs(half - std::round(half)) < kEps;
}
}  // namespace

Anisotropy Anisotropy::make(std::vector<double> beta) {
  if (beta.empty()) throw std::invalid_argument("Anisotropy: empty beta");
  for (double b : beta)
    if (!(b > 0.0)) throw std::invalid_argument("Anisotropy: beta entries must be positive");
  const double d = double(beta.size());
  Anisotropy a;
  a.beta = std::move(beta);
  for (int l = 1; l <= 10000; ++l) {
    bool ok = true;
    for (double b : a.beta) {
      const double lb = double(l) * b;
      if (!(lb > d + kEps) && !is_even_integer(lb)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      a.ell = l;
      return a;
    }
  }
  throw std::invalid_argument("Anisotropy: no admissible l <= 10000 for this beta");
}

double quasi_norm(std::span<const double> xi, const Anisotropy& aniso) {
  if (xi.size() != aniso.dim())
    throw std::invalid_argument("quasi_norm: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i)
    s += std::pow(std::abs(xi[i]), double(aniso.ell) * aniso.beta[i]);
  return std::pow(s, 1.0 / double(aniso.ell));
}

std::vector<double> project(std::span<const double> xi, const Anisotropy& aniso) {
  const double qn = quasi_norm(xi, aniso);
  if (qn == 0.0) throw std::invalid_argument("project: xi must be nonzero");
  std::vector<double> eta(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i)
    eta[i] = xi[i] * std::pow(qn, -1.0 / aniso.beta[i]);
  return eta;
}

std::vector<double> dilate(std::span<const double> xi, double lambda,
                           const Anisotropy& aniso) {
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i)
    out[i] = std::pow(lambda, 1.0 / aniso.beta[i]) * xi[i];
  return out;
}

double cutoff_profile(double r) {
  auto g = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  const double a = g(2.0 - r);
  const double b = g(r - 1.0);
  if (a == 0.0) return 0.0;
  return a / (a + b);
}

double cutoff_theta(std::span<const double> xi, const Anisotropy& aniso) {
  return cutoff_profile(quasi_norm(xi, aniso));
}

std::vector<std::vector<double>> sphere_lattice(std::size_t dim, std::size_t count) {
  std::vector<std::vector<double>> pts;
  if (dim == 1) {
    pts.push_back({1.0});
    pts.push_back({-1.0});
    return pts;
  }
  if (dim == 2) {
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double th = kTwoPi * (double(i) + 0.5) / double(count);
      pts.push_back({std::cos(th), std::sin(th)});
    }
    return pts;
  }
  if (dim == 3) {
    // Fibonacci lattice
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double z = 1.0 - 2.0 * (double(i) + 0.5) / double(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = kTwoPi * double(i) / golden;
      pts.push_back({r * std::cos(th), r * std::sin(th), z});
    }
    return pts;
  }
  // Higher dimensions: deterministic Gaussian directions, normalized.
  Rng rng(0xd1b54a32d192ed03ULL + dim);
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(dim);
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (auto& c : v) {
        c = rng.normal();
        n2 += c * c;
      }
    } while (n2 < 1e-12);
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& c : v) c *= inv;
    pts.push_back(std::move(v));
  }
  return pts;
}

std::vector<std::vector<double>> manifold_samples(const Anisotropy& aniso,
                                                  std::size_t count) {
  auto dirs = sphere_lattice(aniso.dim(), count);
  for (auto& w : dirs) w = project(w, aniso);
  return dirs;
}

std::vector<double> manifold_point_at_angle(double phi, const Anisotropy& aniso) {
  if (aniso.dim() != 2)
    throw std::invalid_argument("manifold_point_at_angle: requires d == 2");
  const double c = std::cos(phi), s = std::sin(phi);
  // Solve sum |r w_i|^{l b_i} = 1 for r > 0 (strictly monotone in r).
  const double lb0 = double(aniso.ell) * aniso.beta[0];
  const double lb1 = double(aniso.ell) * aniso.beta[1];
  auto F = [&](double r) {
    return std::pow(std::abs(r * c), lb0) + std::pow(std::abs(r * s), lb1) - 1.0;
  };
  double lo = 0.0, hi = 1.0;
  while (F(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (F(mid) < 0.0 ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  return {r * c, r * s};
}

}  // namespace defectlab
