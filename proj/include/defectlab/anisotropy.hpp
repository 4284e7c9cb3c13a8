// anisotropy.hpp — the exponent vector beta, the quasi-norm |xi|_beta, the
// compact manifold P^d = { sum |xi_i|^{l beta_i} = 1 }, and the
// 0-quasi-homogeneous projection onto it.

#pragma once

#include <span>
#include <vector>

namespace defectlab {

/// Exponent vector beta with the derived integer l: the minimal positive
/// integer such that, for each i, either l*beta_i > d or l*beta_i is an even
/// integer. The manifold P^d is then C^d-smooth.
struct Anisotropy {
  std::vector<double> beta;
  int ell = 0;

  static Anisotropy make(std::vector<double> beta);
  std::size_t dim() const { return beta.size(); }
};

/// |xi|_beta = (sum_i |xi_i|^{l beta_i})^{1/l}; zero iff xi == 0.
double quasi_norm(std::span<const double> xi, const Anisotropy& aniso);

/// pi_P(xi)_i = xi_i |xi|_beta^{-1/beta_i}; lands on P^d, invariant under
/// anisotropic dilations xi_i -> lambda^{1/beta_i} xi_i. Rejects xi == 0.
std::vector<double> project(std::span<const double> xi, const Anisotropy& aniso);

/// Apply the anisotropic dilation xi_i -> lambda^{1/beta_i} xi_i.
std::vector<double> dilate(std::span<const double> xi, double lambda,
                           const Anisotropy& aniso);

/// Smooth cutoff equal to 1 on {|xi|_beta <= 1} and 0 on {|xi|_beta >= 2},
/// built from the radial profile h(r) = g(2-r)/(g(2-r)+g(r-1)) with
/// g(t) = exp(-1/t) for t > 0 and 0 otherwise.
double cutoff_theta(std::span<const double> xi, const Anisotropy& aniso);
double cutoff_profile(double r);

/// Dense sample of P^d obtained by pushing a uniform lattice on the Euclidean
/// sphere S^{d-1} through pi_P. d == 1 yields the two points {-1, +1}.
std::vector<std::vector<double>> manifold_samples(const Anisotropy& aniso,
                                                  std::size_t count);

/// Uniform-ish lattice on the Euclidean unit sphere (deterministic).
std::vector<std::vector<double>> sphere_lattice(std::size_t dim, std::size_t count);

/// d == 2 only: the point of P^2 whose polar angle (atan2 of its coordinates)
/// equals phi. P^2 is star-shaped, so this parametrizes it bijectively.
std::vector<double> manifold_point_at_angle(double phi, const Anisotropy& aniso);

}  // namespace defectlab
