#include "defectlab/defect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace defectlab {

PhaseSpaceField as_phase(const ScalarField& f) {
  return PhaseSpaceField(f.spec(), std::vector<cplx>(f.values().begin(), f.values().end()));
}

PhaseFamily as_phase(const ScalarFamily& fam) {
  PhaseFamily out;
  out.label = fam.label;
  out.p_bound = fam.p_bound;
  out.indices = fam.indices;
  out.generator = [gen = fam.generator](int n) { return as_phase(gen(n)); };
  return out;
}

// ---- bilinear sample -------------------------------------------------------------

namespace {

cplx quadrature_against(const PhaseSpaceField& u, const PhaseSpaceField& phi1,
                        const ScalarField& w) {
  // int phi1 * u * conj(w broadcast over y)
  const GridSpec& spec = u.spec();
  if (phi1.spec() != spec) throw std::invalid_argument("bilinear: phi1 grid mismatch");
  if (w.spec() != spec.x_only()) throw std::invalid_argument("bilinear: x grid mismatch");
  const std::size_t yt = spec.y_total();
  cplx acc{0.0, 0.0};
  for (std::size_t ix = 0; ix < spec.x_total(); ++ix) {
    const cplx wc = std::conj(w[ix]);
    cplx inner_acc{0.0, 0.0};
    const std::size_t base = ix * yt;
    for (std::size_t iy = 0; iy < yt; ++iy)
      inner_acc += phi1.values()[base + iy] * u.values()[base + iy];
    acc += inner_acc * wc;
  }
  return acc * spec.cell_volume();
}

}  // namespace

cplx bilinear_sample(const PhaseSpaceField& u, const ScalarField& v,
                     const PhaseSpaceField& phi1, const ScalarField& phi2,
                     const MultiplierOp& op) {
  const ScalarField w = apply(op, multiply(phi2, v));
  return quadrature_against(u, phi1, w);
}

cplx bilinear_sample(const PhaseSpaceField& u, const ScalarField& v,
                     const PhaseSpaceField& phi1, const ScalarField& phi2,
                     const SymbolOnManifold& psi, const Anisotropy& aniso) {
  return bilinear_sample(u, v, phi1, phi2, symbol_op(psi, aniso, v.spec()));
}

// ---- extrapolation ----------------------------------------------------------------

bool DefectEstimate::declared_zero() const {
  return std::abs(limit) < std::max(1e-6 * scale, 2.0 * fit_residual);
}

DefectEstimate extrapolate(std::vector<int> indices, std::vector<cplx> samples,
                           double scale) {
  if (indices.size() != samples.size() || indices.empty())
    throw std::invalid_argument("extrapolate: bad sample list");
  DefectEstimate est;
  est.indices = std::move(indices);
  est.samples = std::move(samples);
  est.scale = scale;

  const std::size_t m = est.indices.size();
  const std::size_t take = std::max<std::size_t>(2, (m + 1) / 2);
  const std::size_t begin = m > take ? m - take : 0;
  std::vector<double> xs;
  std::vector<cplx> ys;
  for (std::size_t i = begin; i < m; ++i) {
    xs.push_back(1.0 / double(est.indices[i]));
    ys.push_back(est.samples[i]);
  }

  bool distinct = false;
  for (std::size_t i = 1; i < xs.size(); ++i) distinct = distinct || xs[i] != xs[0];

  if (xs.size() >= 2 && distinct) {
    // least squares y = a + b x, real and imaginary parts share the design
    const double k = double(xs.size());
    double sx = 0, sxx = 0;
    cplx sy{0, 0}, sxy{0, 0};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sxx += xs[i] * xs[i];
      sy += ys[i];
      sxy += xs[i] * ys[i];
    }
    const double det = k * sxx - sx * sx;
    const cplx b = (k * sxy - sx * sy) / det;
    const cplx a = (sy - b * sx) / k;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) rss += std::norm(ys[i] - (a + b * xs[i]));
    est.limit = a;
    est.fit_residual = std::sqrt(rss / k);
    est.method = "1/n-fit";
  } else {
    cplx mean{0, 0};
    for (const cplx& y : ys) mean += y;
    mean /= double(ys.size());
    double rss = 0.0;
    for (const cplx& y : ys) rss += std::norm(y - mean);
    est.limit = mean;
    est.fit_residual = std::sqrt(rss / double(ys.size()));
    est.method = "tail-average";
  }
  est.converged = est.fit_residual < 0.1 * std::abs(est.limit) ||
                  std::abs(est.limit) < 1e-6 * est.scale;
  return est;
}

// ---- estimate ---------------------------------------------------------------------

DefectEstimate estimate(const PhaseFamily& fam_u, const ScalarFamily& fam_v,
                        const PhaseSpaceField& phi1, const ScalarField& phi2,
                        const SymbolOnManifold& psi, const Anisotropy& aniso,
                        const EstimateOptions& opt) {
  if (fam_u.indices != fam_v.indices)
    throw std::invalid_argument("estimate: families must share the index ladder");
  const MultiplierOp op = symbol_op(psi, aniso, phi2.spec());
  const ScalarField ones(phi2.spec(), std::vector<cplx>(phi2.size(), cplx{1.0, 0.0}));
  const PhaseSpaceField phi1_phi2bar = multiply_x(phi1, conjugate(phi2));

  const double phi1_sup = lp_norm(phi1, std::numeric_limits<double>::infinity());
  const double phi2_sup = lp_norm(phi2, std::numeric_limits<double>::infinity());
  std::vector<cplx> samples;
  std::vector<double> rev2;
  std::vector<double> bounds;
  double up = 0.0, vq = 0.0;
  for (int n : fam_u.indices) {
    const PhaseSpaceField u = fam_u(n);
    const ScalarField v = fam_v(n);
    const double un = lp_norm(u, fam_u.p_bound);
    const double vn = lp_norm(v, fam_v.p_bound);
    up = std::max(up, un);
    vq = std::max(vq, vn);
    bounds.push_back(un * vn * phi1_sup * phi2_sup * std::max(op.sup(), 1e-300));
    const cplx bn = bilinear_sample(u, v, phi1, phi2, op);
    samples.push_back(bn);
    if (opt.check_rev2) {
      const cplx bn_moved = bilinear_sample(u, v, phi1_phi2bar, ones, op);
      rev2.push_back(std::abs(bn - bn_moved));
    }
  }
  const double scale = up * vq * phi1_sup * phi2_sup * std::max(op.sup(), 1e-300);
  DefectEstimate est = extrapolate(fam_u.indices, std::move(samples), scale);
  est.sample_bound = std::move(bounds);
  est.rev2_gap = std::move(rev2);
  return est;
}

HMeasureResult hmeasure_sample(const PhaseFamily& fam_u, const ScalarFamily& fam_v,
                               const PhaseSpaceField& phi1, const ScalarField& phi2,
                               const SymbolOnManifold& psi, const Anisotropy& aniso) {
  HMeasureResult out;
  out.est = estimate(fam_u, fam_v, phi1, phi2, psi, aniso);
  const double slack = out.est.fit_residual + 1e-8;
  out.positivity_witness =
      out.est.limit.real() >= -slack && std::abs(out.est.limit.imag()) <= slack;
  return out;
}

// ---- commutator decay --------------------------------------------------------------

CommutatorDecay commutator_decay(const ScalarField& b, const SymbolOnManifold& psi,
                                 const Anisotropy& aniso, const ScalarFamily& fam_v,
                                 double q, double r) {
  const double p = fam_v.p_bound;
  const bool admissible = p >= 2.0 ? (q >= 2.0 && (q <= p || std::isinf(p)))
                                   : (q >= p && q <= 2.0 && q > 1.0);
  if (!admissible)
    throw std::invalid_argument("commutator_decay: q outside the lemma's range");

  const MultiplierOp op = symbol_op(psi, aniso, b.spec());
  CommutatorDecay out;
  out.q = q;
  out.r = r;
  out.indices = fam_v.indices;
  // 1/q = alpha/2 + (1-alpha)/r
  out.alpha = r == 2.0 ? 1.0 : (1.0 / q - 1.0 / r) / (0.5 - 1.0 / r);

  for (int n : fam_v.indices) {
    const ScalarField cv = commutator_apply(b, op, fam_v(n));
    out.norm_q.push_back(lp_norm(cv, q));
    out.norm_2.push_back(lp_norm(cv, 2.0));
    out.norm_r.push_back(lp_norm(cv, r));
  }
  out.slope = log_log_slope(out.indices, out.norm_q, 1e-300);
  out.pass = out.norm_q.back() < 0.25 * out.norm_q.front() && out.slope < 0.0;
  out.interpolation_ok = true;
  for (std::size_t i = 0; i < out.norm_q.size(); ++i) {
    const double rhs =
        std::pow(out.norm_2[i], out.alpha) * std::pow(out.norm_r[i], 1.0 - out.alpha);
    if (out.norm_q[i] > rhs * (1.0 + 1e-9) + 1e-300) out.interpolation_ok = false;
  }
  return out;
}

// ---- localization -------------------------------------------------------------------

LocalizationResult localization_residual(const PrincipalSymbol& A,
                                         const PhaseFamily& fam_u,
                                         const ScalarFamily& fam_v,
                                         const PhaseSpaceField& phi1,
                                         const ScalarField& phi2,
                                         const SymbolOnManifold& psi, double gamma,
                                         const PhaseFamily* source) {
  if (fam_u.indices != fam_v.indices)
    throw std::invalid_argument("localization_residual: ladder mismatch");
  const Anisotropy& aniso = A.aniso;
  const GridSpec xspec = phi2.spec();

  // one assembled operator per term: psi * (-2 pi i pi_P)^{alpha_k} with the
  // (1-theta) guard and the T^{gamma - sum alpha/beta} factor
  std::vector<MultiplierOp> ops;
  std::vector<PhaseSpaceField> weights;  // a_k * phi1
  for (std::size_t k = 0; k < A.terms.size(); ++k) {
    double t_exp = gamma - 1.0 + A.homogeneity_defect(k);  // gamma - sum alpha/beta
    if (std::abs(t_exp) < 1e-12) t_exp = 0.0;
    if (t_exp < 0.0)
      throw std::invalid_argument("localization_residual: term order exceeds gamma");
    ops.push_back(projected_power_op(xspec, aniso, A.terms[k].alpha, -1, t_exp, &psi));
    weights.push_back(multiply(A.terms[k].coefficient, phi1));
  }

  LocalizationResult out;
  std::vector<cplx> samples;
  std::vector<double> term_scales(A.terms.size(), 0.0);
  const double sqrt_vy = std::sqrt(fam_u(fam_u.indices.front()).spec().y_volume());
  for (int n : fam_u.indices) {
    const PhaseSpaceField u = fam_u(n);
    const SpectralField sv = forward_transform(multiply(phi2, fam_v(n)));
    cplx rn{0.0, 0.0};
    for (std::size_t k = 0; k < A.terms.size(); ++k) {
      const ScalarField w = apply_spectrum(ops[k], sv);
      rn += quadrature_against(u, weights[k], w);
      const double bnd =
          lp_norm(multiply(weights[k], u), 2.0) * lp_norm(w, 2.0) * sqrt_vy;
      term_scales[k] = std::max(term_scales[k], bnd);
    }
    samples.push_back(rn);
  }
  out.scale = std::accumulate(term_scales.begin(), term_scales.end(), 0.0);
  out.est = extrapolate(fam_u.indices, std::move(samples), out.scale);

  if (source) {
    out.source_norms = dual_sobolev_report(*source, -gamma, aniso, 2.0);
    const double first = out.source_norms.front();
    const double last = out.source_norms.back();
    out.source_decays = first <= 1e-12 * out.scale || last <= 0.5 * first;
  }
  return out;
}

// ---- regularized zero test ------------------------------------------------------------

namespace {

// Evaluate |A|^2/(|A|^2 + delta) at a coefficient grid point for precomputed
// per-sample symbol factors.
struct FrequencyBasis {
  // basis symbols on P^d and matching analysis weights at the sample angles
  std::vector<MultiplierOp> ops;              // table of psi * e_s
  std::vector<std::vector<cplx>> analysis;    // [s][t]: conj(e_s(eta_t)) / T
  std::vector<std::vector<double>> points;    // eta_t on P^d
};

FrequencyBasis build_basis(const SymbolOnManifold& psi, const Anisotropy& aniso,
                           const GridSpec& xspec, int max_harmonic) {
  FrequencyBasis basis;
  const std::size_t d = aniso.dim();
  if (d == 1) {
    basis.points = {{1.0}, {-1.0}};
    for (int side = 0; side < 2; ++side) {
      const double target = side == 0 ? 1.0 : -1.0;
      auto indicator = [target, psi](std::span<const double> eta) {
        const double on = (target > 0.0) == (eta[0] > 0.0) ? 1.0 : 0.0;
        return cplx{on, 0.0} * psi.eval(eta);
      };
      SymbolOnManifold s;
      s.eval = indicator;
      s.label = "half_line";
      basis.ops.push_back(symbol_op(s, aniso, xspec));
      basis.analysis.push_back({side == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0},
                                side == 0 ? cplx{0.0, 0.0} : cplx{1.0, 0.0}});
    }
    return basis;
  }
  if (d != 2)
    throw std::invalid_argument("regularized_zero_test: implemented for d in {1,2}");

  const int t_count = std::max(8 * max_harmonic, 32);
  basis.points.reserve(t_count);
  for (int t = 0; t < t_count; ++t)
    basis.points.push_back(
        manifold_point_at_angle(kTwoPi * double(t) / double(t_count), aniso));

  for (int s = -max_harmonic; s <= max_harmonic; ++s) {
    auto harmonic = [s, psi](std::span<const double> eta) {
      const double phi = std::atan2(eta[1], eta[0]);
      return std::polar(1.0, double(s) * phi) * psi.eval(eta);
    };
    SymbolOnManifold sym;
    sym.eval = harmonic;
    sym.label = "harmonic";
    basis.ops.push_back(symbol_op(sym, aniso, xspec));
    std::vector<cplx> row(t_count);
    for (int t = 0; t < t_count; ++t)
      row[t] = std::polar(1.0 / double(t_count),
                          -double(s) * kTwoPi * double(t) / double(t_count));
    basis.analysis.push_back(std::move(row));
  }
  return basis;
}

}  // namespace

RegularizedZeroReport regularized_zero_test(const PrincipalSymbol& A,
                                            const PhaseFamily& fam_u,
                                            const ScalarFamily& fam_v,
                                            const PhaseSpaceField& phi1,
                                            const ScalarField& phi2,
                                            const SymbolOnManifold& psi,
                                            std::span<const double> deltas,
                                            int max_harmonic) {
  RegularizedZeroReport rep;
  // a dense scan, so degenerate directions falling between coarse lattice
  // samples still trip the gate
  const DegeneracyReport scan = degeneracy_scan(A, 4096);
  if (!(scan.min_abs_rndc > 1e-3 * scan.max_abs)) {
    rep.applicable = false;
    rep.reason = "restrictive non-degeneracy fails (min |A| ~ 0 on sampled manifold)";
    return rep;
  }
  rep.applicable = true;
  const Anisotropy& aniso = A.aniso;
  const GridSpec xspec = phi2.spec();
  const GridSpec& cspec = A.terms.at(0).coefficient.spec();
  if (cspec != phi1.spec())
    throw std::invalid_argument("regularized_zero_test: phi1 grid must match coefficients");

  FrequencyBasis basis = build_basis(psi, aniso, xspec, max_harmonic);
  const std::size_t t_count = basis.points.size();
  const std::size_t s_count = basis.ops.size();

  // per-sample symbol values sigma_k(eta_t) for the leading terms
  std::vector<std::vector<cplx>> sigma(A.leading.size(), std::vector<cplx>(t_count));
  for (std::size_t t = 0; t < t_count; ++t)
    for (std::size_t i = 0; i < A.leading.size(); ++i) {
      const auto& alpha = A.terms[A.leading[i]].alpha;
      cplx pw{1.0, 0.0};
      for (std::size_t j = 0; j < alpha.size(); ++j)
        pw *= imag_power(basis.points[t][j], alpha[j], +1);
      sigma[i][t] = pw;
    }

  // cache w_{n,s} = A_{psi e_s}(phi2 v_n) and the u_n fields' data per index
  const std::size_t nl = fam_u.indices.size();
  std::vector<PhaseSpaceField> us(nl);
  std::vector<std::vector<ScalarField>> ws(nl);
  std::vector<double> bound_m(nl, 0.0);
  double sup_psi = 0.0;
  for (const auto& pt : basis.points)
    sup_psi = std::max(sup_psi, std::abs(psi.eval(pt)));
  for (std::size_t ni = 0; ni < nl; ++ni) {
    const int n = fam_u.indices[ni];
    us[ni] = fam_u(n);
    const ScalarField pv = multiply(phi2, fam_v(n));
    const SpectralField sv = forward_transform(pv);
    ws[ni].reserve(s_count);
    for (std::size_t s = 0; s < s_count; ++s)
      ws[ni].push_back(apply_spectrum(basis.ops[s], sv));
    bound_m[ni] = sup_psi * lp_norm(multiply(phi1, us[ni]), 2.0) * lp_norm(pv, 2.0) *
                  std::sqrt(us[ni].spec().y_volume());
  }
  rep.bound_M = *std::max_element(bound_m.begin(), bound_m.end());
  rep.scale = rep.bound_M;

  const std::size_t ytot = cspec.y_total();
  for (double delta : deltas) {
    rep.deltas.push_back(delta);
    rep.gaps.push_back(delta / (scan.min_abs_rndc * scan.min_abs_rndc + delta));

    // c_s(x,y): angle-analysis of F_delta(x,y,eta_t) against the basis
    std::vector<PhaseSpaceField> cs(s_count, PhaseSpaceField(cspec));
    std::vector<cplx> f_vals(t_count);
    for (std::size_t ix = 0; ix < cspec.x_total(); ++ix)
      for (std::size_t iy = 0; iy < ytot; ++iy) {
        for (std::size_t t = 0; t < t_count; ++t) {
          cplx a{0.0, 0.0};
          for (std::size_t i = 0; i < A.leading.size(); ++i)
            a += A.terms[A.leading[i]].coefficient.at(ix, iy) * sigma[i][t];
          const double a2 = std::norm(a);
          f_vals[t] = cplx{a2 / (a2 + delta), 0.0};
        }
        const std::size_t flat = ix * ytot + iy;
        for (std::size_t s = 0; s < s_count; ++s) {
          cplx c{0.0, 0.0};
          for (std::size_t t = 0; t < t_count; ++t) c += basis.analysis[s][t] * f_vals[t];
          cs[s][flat] = c;
        }
      }

    std::vector<cplx> samples(nl, cplx{0.0, 0.0});
    for (std::size_t ni = 0; ni < nl; ++ni) {
      cplx v{0.0, 0.0};
      for (std::size_t s = 0; s < s_count; ++s)
        v += quadrature_against(us[ni], multiply(cs[s], phi1), ws[ni][s]);
      samples[ni] = v;
    }
    const DefectEstimate est = extrapolate(fam_u.indices, samples, rep.bound_M);
    rep.values.push_back(est.limit);
  }

  rep.inequality_ok = true;
  for (std::size_t i = 0; i + 1 < rep.values.size(); ++i) {
    const double lhs = std::abs(rep.values[i] - rep.values[i + 1]);
    const double rhs =
        std::max(rep.gaps[i], rep.gaps[i + 1]) * rep.bound_M * 1.05 + 1e-9 * rep.bound_M;
    if (lhs > rhs) rep.inequality_ok = false;
  }
  const double final_bound =
      std::abs(rep.values.back()) + rep.gaps.back() * rep.bound_M;
  rep.concluded_zero = final_bound < 0.05 * std::max(rep.scale, 1e-300);
  return rep;
}

// ---- decompositions ---------------------------------------------------------------------

DecompositionReport band_decomposition_check(
    const PhaseFamily& fam_u, const ScalarFamily& fam_v, const PhaseSpaceField& phi1,
    const ScalarField& phi2, const SymbolOnManifold& psi, const Anisotropy& aniso,
    long l_max) {
  if (l_max < 0) throw std::invalid_argument("band_decomposition_check: l_max < 0");
  const MultiplierOp op = symbol_op(psi, aniso, phi2.spec());
  const double p = fam_u.p_bound;
  if (!(p > 1.0))
    throw std::invalid_argument("band_decomposition_check: need p > 1");
  const double pp = p / (p - 1.0);
  const double phi1_sup = lp_norm(phi1, std::numeric_limits<double>::infinity());

  DecompositionReport rep;
  std::vector<DecompositionRow>& rows = rep.rows;
  rows.resize(std::size_t(l_max) + 1);
  for (long L = 0; L <= l_max; ++L) rows[std::size_t(L)].param = double(L);

  for (int n : fam_u.indices) {
    const PhaseSpaceField u = fam_u(n);
    const ScalarField w = apply(op, multiply(phi2, fam_v(n)));
    const GridSpec& spec = u.spec();
    const std::size_t yt = spec.y_total();
    const double cell = spec.cell_volume();
    const double wy_norm =
        lp_norm(w, pp) * std::pow(spec.y_volume(), 1.0 / pp);

    // bucket the bilinear mass and the L^p mass by band index
    const std::size_t buckets = std::size_t(l_max) + 2;  // last bucket = beyond l_max
    std::vector<cplx> bucket_sum(buckets, cplx{0.0, 0.0});
    std::vector<double> bucket_pmass(buckets, 0.0);
    cplx direct{0.0, 0.0};
    for (std::size_t ix = 0; ix < spec.x_total(); ++ix) {
      const cplx wc = std::conj(w[ix]);
      const std::size_t base = ix * yt;
      for (std::size_t iy = 0; iy < yt; ++iy) {
        const cplx z = phi1.values()[base + iy] * u.values()[base + iy] * wc;
        direct += z;
        const double a = std::abs(u.values()[base + iy]);
        if (a == 0.0) continue;
        long l = long(std::ceil(a)) - 1;
        if (l < 0) l = 0;
        const std::size_t b = std::min<std::size_t>(std::size_t(l), buckets - 1);
        bucket_sum[b] += z;
        bucket_pmass[b] += std::pow(a, p);
      }
    }
    direct *= cell;
    rep.direct_scale = std::max(rep.direct_scale, std::abs(direct));

    cplx partial{0.0, 0.0};
    double total_pmass = 0.0;
    for (double m : bucket_pmass) total_pmass += m;
    double tail_pmass = total_pmass;
    for (long L = 0; L <= l_max; ++L) {
      partial += bucket_sum[std::size_t(L)];
      tail_pmass -= bucket_pmass[std::size_t(L)];
      const double gap = std::abs(direct - partial * cell);
      const double tail_norm = std::pow(std::max(tail_pmass, 0.0) * cell, 1.0 / p);
      const double bound = phi1_sup * tail_norm * wy_norm;
      rows[std::size_t(L)].gap = std::max(rows[std::size_t(L)].gap, gap);
      rows[std::size_t(L)].bound = std::max(rows[std::size_t(L)].bound, bound);
    }
  }
  return rep;
}

std::vector<std::vector<long>> ordered_y_modes(const GridSpec& spec, std::size_t count) {
  const std::size_t dy = spec.dim_y();
  std::vector<std::vector<long>> modes;
  modes.reserve(spec.y_total());
  std::vector<std::size_t> idx(dy);
  const GridSpec yspec = spec.y_only();
  for (std::size_t i = 0; i < spec.y_total(); ++i) {
    yspec.decode(i, 0, dy, idx.data());
    std::vector<long> k(dy);
    for (std::size_t a = 0; a < dy; ++a) k[a] = yspec.freq_index(a, idx[a]);
    modes.push_back(std::move(k));
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const std::vector<long>& a, const std::vector<long>& b) {
                     long sa = 0, sb = 0;
                     for (long v : a) sa += std::labs(v);
                     for (long v : b) sb += std::labs(v);
                     if (sa != sb) return sa < sb;
                     return a < b;
                   });
  if (modes.size() > count) modes.resize(count);
  return modes;
}

DecompositionReport basis_decomposition_check(
    const PhaseFamily& fam_u, const ScalarFamily& fam_v, const PhaseSpaceField& phi1,
    const ScalarField& phi2, const SymbolOnManifold& psi, const Anisotropy& aniso,
    std::size_t i_max) {
  const MultiplierOp op = symbol_op(psi, aniso, phi2.spec());
  const GridSpec& spec = phi1.spec();
  if (spec.dim_y() == 0)
    throw std::invalid_argument("basis_decomposition_check: needs y axes");
  const GridSpec yspec = spec.y_only();
  const std::size_t yt = spec.y_total();
  const auto modes = ordered_y_modes(spec, std::min<std::size_t>(i_max, yt));
  const double vy = spec.y_volume();

  const PhaseSpaceField phi1_hat = forward_transform_y(phi1);

  auto mode_flat = [&](std::span<const long> k, bool negate) {
    std::size_t flat = 0;
    for (std::size_t a = 0; a < yspec.dim_x(); ++a) {
      const long n = long(yspec.samples(a));
      long j = negate ? -k[a] : k[a];
      j = ((j % n) + n) % n;
      flat = flat * std::size_t(n) + std::size_t(j);
    }
    return flat;
  };

  DecompositionReport rep;
  std::vector<DecompositionRow>& rows = rep.rows;
  rows.resize(modes.size());
  for (std::size_t i = 0; i < modes.size(); ++i) rows[i].param = double(i + 1);

  for (int n : fam_u.indices) {
    const PhaseSpaceField u = fam_u(n);
    const ScalarField w = apply(op, multiply(phi2, fam_v(n)));
    const cplx direct = quadrature_against(u, phi1, w);
    rep.direct_scale = std::max(rep.direct_scale, std::abs(direct));
    const PhaseSpaceField u_hat = forward_transform_y(u);

    const double xcell = spec.x_cell_volume();
    cplx partial{0.0, 0.0};
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::size_t fm_plus = mode_flat(modes[i], false);
      const std::size_t fm_minus = mode_flat(modes[i], true);
      // term_i = V_y * sum_x phi1_hat(x, +k) u_hat(x, -k) conj(w(x)) xcell
      cplx term{0.0, 0.0};
      for (std::size_t ix = 0; ix < spec.x_total(); ++ix)
        term += phi1_hat.values()[ix * yt + fm_plus] *
                u_hat.values()[ix * yt + fm_minus] * std::conj(w[ix]);
      partial += term * xcell * vy;
      const double gap = std::abs(direct - partial);
      rows[i].gap = std::max(rows[i].gap, gap);
    }
  }
  return rep;
}

}  // namespace defectlab
