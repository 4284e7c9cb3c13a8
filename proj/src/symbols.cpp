#include "defectlab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace defectlab {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-9; }

/// Recursive central difference D^{multi} f at xi with uniform step h.
cplx central_difference(const std::function<cplx(std::span<const double>)>& f,
                        std::vector<double>& xi, std::span<const int> multi,
                        double h) {
  int axis = -1;
  for (std::size_t j = 0; j < multi.size(); ++j)
    if (multi[j] > 0) {
      axis = int(j);
      break;
    }
  if (axis < 0) return f(xi);
  std::vector<int> rest(multi.begin(), multi.end());
  rest[axis] -= 1;
  xi[axis] += h;
  const cplx plus = central_difference(f, xi, rest, h);
  xi[axis] -= 2.0 * h;
  const cplx minus = central_difference(f, xi, rest, h);
  xi[axis] += h;
  return (plus - minus) / (2.0 * h);
}

void gen_multis(std::size_t dim, int cap, std::vector<int>& cur,
                std::vector<std::vector<int>>& out) {
  if (cur.size() == dim) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int v : cur) used += v;
  for (int v = 0; v <= cap - used; ++v) {
    cur.push_back(v);
    gen_multis(dim, cap, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> multi_indices_up_to(std::size_t dim, int cap) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  gen_multis(dim, cap, cur, out);
  return out;
}

cplx imag_power(double xi, double alpha, int sign) {
  if (alpha == 0.0) return {1.0, 0.0};
  if (xi == 0.0) return {0.0, 0.0};
  const double mag = std::pow(std::abs(kTwoPi * xi), alpha);
  const double arg = double(sign) * alpha * (kPi / 2.0) * sgn(xi);
  return std::polar(mag, arg);
}

double estimate_cd_norm(const SymbolOnManifold& psi, const Anisotropy& aniso,
                        std::size_t samples, int order) {
  const std::size_t d = aniso.dim();
  if (order < 0) order = int(d);
  auto ambient = [&](std::span<const double> xi) { return psi.eval(project(xi, aniso)); };
  const auto pts = manifold_samples(aniso, samples);
  const auto multis = multi_indices_up_to(d, order);
  double sup = 0.0;
  std::vector<double> xi(d);
  for (const auto& p : pts) {
    for (const auto& m : multis) {
      std::copy(p.begin(), p.end(), xi.begin());
      const cplx v = central_difference(ambient, xi, m, 1e-3);
      const double a = std::abs(v);
      if (std::isfinite(a)) sup = std::max(sup, a);
    }
  }
  return sup;
}

SymbolOnManifold make_symbol(std::string label,
                             std::function<cplx(std::span<const double>)> eval,
                             const Anisotropy& aniso) {
  SymbolOnManifold s;
  s.label = std::move(label);
  s.eval = std::move(eval);
  s.cd_norm_estimate = estimate_cd_norm(s, aniso);
  return s;
}

SymbolOnManifold named_symbol(const std::string& name, const Anisotropy& aniso) {
  auto need_dim = [&](std::size_t d) {
    if (aniso.dim() < d)
      throw std::invalid_argument("named_symbol: symbol '" + name +
                                  "' needs dimension >= " + std::to_string(d));
  };
  if (name == "one")
    return make_symbol(name, [](std::span<const double>) { return cplx{1.0, 0.0}; }, aniso);
  if (name == "eta1")
    return make_symbol(name, [](std::span<const double> e) { return cplx{e[0], 0.0}; }, aniso);
  if (name == "eta2") {
    need_dim(2);
    return make_symbol(name, [](std::span<const double> e) { return cplx{e[1], 0.0}; }, aniso);
  }
  if (name == "eta1_sq")
    return make_symbol(name, [](std::span<const double> e) { return cplx{e[0] * e[0], 0.0}; }, aniso);
  if (name == "eta_diff_sq") {
    need_dim(2);
    return make_symbol(
        name, [](std::span<const double> e) { return cplx{e[0] * e[0] - e[1] * e[1], 0.0}; },
        aniso);
  }
  if (name == "sign_eta1")
    return make_symbol(name,
                       [](std::span<const double> e) {
                         return cplx{e[0] > 0.0 ? 1.0 : (e[0] < 0.0 ? -1.0 : 0.0), 0.0};
                       },
                       aniso);
  if (name == "gauss_eta1")
    return make_symbol(
        name,
        [](std::span<const double> e) {
          const double t = e[0] - 0.3;
          return cplx{std::exp(-4.0 * t * t), 0.0};
        },
        aniso);
  if (name == "half_plus_eta1")
    return make_symbol(
        name, [](std::span<const double> e) { return cplx{0.5 * (1.1 + e[0]), 0.0}; }, aniso);
  throw std::invalid_argument("named_symbol: unknown symbol '" + name + "'");
}

std::vector<cplx> extend_symbol(const SymbolOnManifold& psi,
                                const Anisotropy& aniso, const GridSpec& spec) {
  if (aniso.dim() != spec.dim_x())
    throw std::invalid_argument("extend_symbol: anisotropy/grid dimension mismatch");
  const std::size_t d = spec.dim_x();
  std::vector<cplx> table(spec.x_total());
  std::vector<std::size_t> idx(d);
  std::vector<double> xi(d);
  for (std::size_t i = 0; i < table.size(); ++i) {
    spec.decode(i, 0, d, idx.data());
    bool dc = true;
    for (std::size_t a = 0; a < d; ++a) {
      xi[a] = spec.freq(a, idx[a]);
      if (xi[a] != 0.0) dc = false;
    }
    table[i] = dc ? cplx{0.0, 0.0} : psi.eval(project(xi, aniso));
  }
  return table;
}

// ---- Marcinkiewicz ------------------------------------------------------------

namespace {

double marcinkiewicz_level(const std::function<cplx(std::span<const double>)>& psi,
                           const Anisotropy& aniso, int order_cap,
                           int radii_per_octave, int band_count, std::size_t dirs,
                           double step_scale) {
  const std::size_t d = aniso.dim();
  const auto multis = multi_indices_up_to(d, order_cap);
  const auto etas = manifold_samples(aniso, dirs);
  // dyadic radii over [2^-8, 2^8] plus a dense linear band across [0.9, 2.3]
  // where cutoff transitions concentrate the derivative sup
  std::vector<double> radii;
  for (int j = -8 * radii_per_octave; j <= 8 * radii_per_octave; ++j)
    radii.push_back(std::pow(2.0, double(j) / double(radii_per_octave)));
  for (int i = 0; i < band_count; ++i)
    radii.push_back(0.9 + (2.3 - 0.9) * double(i) / double(band_count - 1));
  double sup = 0.0;
  std::vector<double> xi(d);
  for (double r : radii) {
    const double h = step_scale * r;
    for (const auto& eta : etas) {
      const auto p = dilate(eta, r, aniso);
      for (const auto& m : multis) {
        std::copy(p.begin(), p.end(), xi.begin());
        const cplx der = central_difference(psi, xi, m, h);
        double w = 1.0;
        for (std::size_t a = 0; a < d; ++a) w *= std::pow(std::abs(p[a]), double(m[a]));
        const double v = w * std::abs(der);
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        sup = std::max(sup, v);
      }
    }
  }
  return sup;
}

}  // namespace

MarcinkiewiczReport marcinkiewicz_sup(
    const std::function<cplx(std::span<const double>)>& psi,
    const Anisotropy& aniso, int order_cap) {
  const std::size_t d = aniso.dim();
  if (order_cap < 0) order_cap = int(d);
  const std::size_t dirs0 = d == 1 ? 2 : (d == 2 ? 64 : 128);
  MarcinkiewiczReport rep;
  rep.sup_coarse = marcinkiewicz_level(psi, aniso, order_cap, 2, 96, dirs0, 1e-3);
  rep.sup_fine = marcinkiewicz_level(psi, aniso, order_cap, 4, 192, 2 * dirs0, 5e-4);
  rep.certified = std::isfinite(rep.sup_fine) && std::isfinite(rep.sup_coarse) &&
                  rep.sup_fine <= 1.05 * rep.sup_coarse;
  return rep;
}

// ---- principal symbols ---------------------------------------------------------

double PrincipalSymbol::homogeneity_defect(std::size_t k) const {
  double s = 0.0;
  for (std::size_t j = 0; j < aniso.dim(); ++j) s += terms[k].alpha[j] / aniso.beta[j];
  return 1.0 - s;
}

std::vector<std::size_t> classify_leading(
    const std::vector<std::vector<double>>& alphas, const Anisotropy& aniso) {
  std::vector<std::size_t> leading;
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (alphas[k].size() != aniso.dim())
      throw std::invalid_argument("classify_leading: alpha rank mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < aniso.dim(); ++j) s += alphas[k][j] / aniso.beta[j];
    if (s > 1.0 + 1e-12) throw std::invalid_argument("invalid anisotropy");
    if (std::abs(s - 1.0) <= 1e-12) leading.push_back(k);
  }
  return leading;
}

PrincipalSymbol make_principal_symbol(std::vector<SymbolTerm> terms,
                                      const Anisotropy& aniso) {
  std::vector<std::vector<double>> alphas;
  alphas.reserve(terms.size());
  for (const auto& t : terms) alphas.push_back(t.alpha);
  PrincipalSymbol A;
  A.leading = classify_leading(alphas, aniso);
  const double d = double(aniso.dim());
  for (std::size_t k : A.leading)
    for (double a : terms[k].alpha)
      if (!is_integer(a) && a < d - 1e-9)
        throw std::invalid_argument(
            "principal symbol: leading exponents must be integers or >= d");
  for (std::size_t k = 1; k < terms.size(); ++k)
    if (terms[k].coefficient.spec() != terms[0].coefficient.spec())
      throw std::invalid_argument("principal symbol: coefficient grids differ");
  A.terms = std::move(terms);
  A.aniso = aniso;
  return A;
}

cplx evaluate_principal(const PrincipalSymbol& A, std::size_t xflat,
                        std::size_t yflat, std::span<const double> xi) {
  cplx acc{0.0, 0.0};
  for (std::size_t k : A.leading) {
    cplx pw{1.0, 0.0};
    for (std::size_t j = 0; j < xi.size(); ++j)
      pw *= imag_power(xi[j], A.terms[k].alpha[j], +1);
    acc += A.terms[k].coefficient.at(xflat, yflat) * pw;
  }
  return acc;
}

// ---- degeneracy ----------------------------------------------------------------

namespace {

struct ScanGrid {
  std::size_t x_total, y_total, x_stride;
};

ScanGrid scan_grid(const PrincipalSymbol& A, std::size_t max_x_samples) {
  const GridSpec& spec = A.terms.at(0).coefficient.spec();
  ScanGrid g{spec.x_total(), spec.y_total(), 1};
  if (max_x_samples > 0 && g.x_total > max_x_samples)
    g.x_stride = (g.x_total + max_x_samples - 1) / max_x_samples;
  return g;
}

// sigma_k(xi) = prod_j (2 pi i xi_j)^{alpha_kj}, leading terms only.
std::vector<std::vector<cplx>> leading_symbol_values(
    const PrincipalSymbol& A, const std::vector<std::vector<double>>& pts) {
  std::vector<std::vector<cplx>> sig(A.leading.size(), std::vector<cplx>(pts.size()));
  for (std::size_t s = 0; s < pts.size(); ++s)
    for (std::size_t i = 0; i < A.leading.size(); ++i) {
      const auto& alpha = A.terms[A.leading[i]].alpha;
      cplx pw{1.0, 0.0};
      for (std::size_t j = 0; j < alpha.size(); ++j)
        pw *= imag_power(pts[s][j], alpha[j], +1);
      sig[i][s] = pw;
    }
  return sig;
}

}  // namespace

namespace {

// |A(ix, iy, eta)| for an explicit manifold point
double abs_A_at(const PrincipalSymbol& A, std::size_t ix, std::size_t iy,
                std::span<const double> eta) {
  cplx acc{0.0, 0.0};
  for (std::size_t k : A.leading) {
    cplx pw{1.0, 0.0};
    for (std::size_t j = 0; j < eta.size(); ++j)
      pw *= imag_power(eta[j], A.terms[k].alpha[j], +1);
    acc += A.terms[k].coefficient.at(ix, iy) * pw;
  }
  return std::abs(acc);
}

struct ScanArgmin {
  std::size_t ix = 0, iy = 0, s = 0;
};

}  // namespace

static DegeneracyReport degeneracy_scan_core(
    const PrincipalSymbol& A, const std::vector<std::vector<double>>& xi_points,
    std::size_t max_x_samples, ScanArgmin* argmin) {
  if (A.leading.empty()) throw std::invalid_argument("degeneracy_scan: empty symbol");
  std::vector<std::vector<double>> pts;
  pts.reserve(xi_points.size());
  for (const auto& p : xi_points) pts.push_back(project(p, A.aniso));
  const auto sig = leading_symbol_values(A, pts);
  const ScanGrid g = scan_grid(A, max_x_samples);

  DegeneracyReport rep;
  rep.min_abs_rndc = std::numeric_limits<double>::infinity();

  auto abs_A = [&](std::size_t ix, std::size_t iy, std::size_t s) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < A.leading.size(); ++i)
      acc += A.terms[A.leading[i]].coefficient.at(ix, iy) * sig[i][s];
    return std::abs(acc);
  };

  for (std::size_t ix = 0; ix < g.x_total; ix += g.x_stride)
    for (std::size_t iy = 0; iy < g.y_total; ++iy)
      for (std::size_t s = 0; s < pts.size(); ++s) {
        const double a = abs_A(ix, iy, s);
        rep.max_abs = std::max(rep.max_abs, a);
        if (a < rep.min_abs_rndc) {
          rep.min_abs_rndc = a;
          if (argmin) *argmin = {ix, iy, s};
        }
      }

  // The zero tolerance references the operator's scale on the whole manifold,
  // so a scan restricted to near-degenerate directions still detects zeros.
  // The floor keeps exact zeros detectable when A vanishes identically.
  double symbol_scale = rep.max_abs;
  {
    const auto lattice = manifold_samples(A.aniso, 256);
    const auto sig_lat = leading_symbol_values(A, lattice);
    for (std::size_t ix = 0; ix < g.x_total; ix += g.x_stride)
      for (std::size_t iy = 0; iy < g.y_total; ++iy)
        for (std::size_t s = 0; s < lattice.size(); ++s) {
          cplx acc{0.0, 0.0};
          for (std::size_t i = 0; i < A.leading.size(); ++i)
            acc += A.terms[A.leading[i]].coefficient.at(ix, iy) * sig_lat[i][s];
          symbol_scale = std::max(symbol_scale, std::abs(acc));
        }
  }
  rep.tol_zero = 1e-10 * symbol_scale + 1e-300;
  for (std::size_t ix = 0; ix < g.x_total; ix += g.x_stride)
    for (std::size_t s = 0; s < pts.size(); ++s) {
      std::size_t zeros = 0;
      for (std::size_t iy = 0; iy < g.y_total; ++iy)
        if (abs_A(ix, iy, s) < rep.tol_zero) ++zeros;
      rep.kingnl_violation_measure =
          std::max(rep.kingnl_violation_measure, double(zeros) / double(g.y_total));
    }
  return rep;
}

DegeneracyReport degeneracy_scan_at(const PrincipalSymbol& A,
                                    const std::vector<std::vector<double>>& xi_points,
                                    std::size_t max_x_samples) {
  return degeneracy_scan_core(A, xi_points, max_x_samples, nullptr);
}

DegeneracyReport degeneracy_scan(const PrincipalSymbol& A, std::size_t manifold_count,
                                 std::size_t max_x_samples) {
  ScanArgmin argmin;
  DegeneracyReport rep = degeneracy_scan_core(
      A, manifold_samples(A.aniso, manifold_count), max_x_samples, &argmin);
  if (A.aniso.dim() != 2) return rep;

  // Lattice scans miss zero directions falling between samples. Refine the
  // sampled minimum by golden-section in the manifold angle at the minimizing
  // grid point, then re-test the classical condition along that direction.
  const double theta0 = kTwoPi * (double(argmin.s) + 0.5) / double(manifold_count);
  const double delta = kTwoPi / double(manifold_count);
  auto value = [&](double phi) {
    const auto eta = manifold_point_at_angle(phi, A.aniso);
    return abs_A_at(A, argmin.ix, argmin.iy, eta);
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = theta0 - delta, hi = theta0 + delta;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = value(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = value(x2);
    }
  }
  const double phi_star = 0.5 * (lo + hi);
  rep.min_abs_rndc = std::min(rep.min_abs_rndc, value(phi_star));

  const auto eta_star = manifold_point_at_angle(phi_star, A.aniso);
  const ScanGrid g = scan_grid(A, max_x_samples);
  for (std::size_t ix = 0; ix < g.x_total; ix += g.x_stride) {
    std::size_t zeros = 0;
    for (std::size_t iy = 0; iy < g.y_total; ++iy)
      if (abs_A_at(A, ix, iy, eta_star) < rep.tol_zero) ++zeros;
    rep.kingnl_violation_measure =
        std::max(rep.kingnl_violation_measure, double(zeros) / double(g.y_total));
  }
  return rep;
}

double delta_regularizer_gap(const PrincipalSymbol& A, double delta,
                             std::size_t manifold_count, std::size_t max_x_samples) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta_regularizer_gap: delta must be > 0");
  const DegeneracyReport rep = degeneracy_scan(A, manifold_count, max_x_samples);
  const double m2 = rep.min_abs_rndc * rep.min_abs_rndc;
  return delta / (m2 + delta);
}

double delta_regularizer_gap_at(const PrincipalSymbol& A, double delta,
                                const std::vector<std::vector<double>>& xi_points,
                                std::size_t max_x_samples) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta_regularizer_gap: delta must be > 0");
  const DegeneracyReport rep = degeneracy_scan_at(A, xi_points, max_x_samples);
  const double m2 = rep.min_abs_rndc * rep.min_abs_rndc;
  return delta / (m2 + delta);
}

}  // namespace defectlab
