#include "defectlab/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "defectlab/multipliers.hpp"

namespace defectlab {

std::vector<int> default_ladder() { return {4, 8, 16, 32, 64}; }

// ---- checks ---------------------------------------------------------------------

double log_log_slope(std::span<const int> n, std::span<const double> values,
                     double floor_at) {
  const std::size_t m = n.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = std::log(double(n[i]));
    const double y = std::log(std::max(values[i], floor_at));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = double(m) * sxx - sx * sx;
  if (denom == 0.0) return 0.0;
  return (double(m) * sxy - sx * sy) / denom;
}

double tail_slope(std::span<const int> n, std::span<const double> values,
                  double floor_at) {
  const std::size_t m = n.size();
  const std::size_t take = std::min(m, std::max<std::size_t>(3, (m + 1) / 2));
  const std::size_t begin = m - take;
  return log_log_slope(n.subspan(begin), values.subspan(begin), floor_at);
}

namespace {

template <class FieldT, class Battery>
FamilyCheck check_family_impl(const SequenceFamily<FieldT>& fam,
                              const Battery& battery) {
  FamilyCheck out;
  std::vector<std::vector<double>> pairings(battery.size());
  double scale = 0.0;
  for (int n : fam.indices) {
    const FieldT u = fam(n);
    out.norms.push_back(lp_norm(u, fam.p_bound));
    scale = std::max(scale, lp_norm(u, 2.0));
    for (std::size_t g = 0; g < battery.size(); ++g)
      pairings[g].push_back(std::abs(inner(u, battery[g])));
  }
  const auto [mn, mx] = std::minmax_element(out.norms.begin(), out.norms.end());
  out.norm_drift = *mn > 0.0 ? *mx / *mn - 1.0 : 0.0;
  out.bounded = out.norm_drift <= 0.05;

  out.weak_null = true;
  out.worst_slope = -1e9;
  for (std::size_t g = 0; g < battery.size(); ++g) {
    const double gnorm = lp_norm(battery[g], 2.0);
    const double tiny = 1e-10 * scale * gnorm;
    if (pairings[g].back() <= tiny) continue;  // pairing already spectrally dead
    const double slope = tail_slope(fam.indices, pairings[g], 1e-300);
    out.worst_slope = std::max(out.worst_slope, slope);
    if (!(slope < -0.05)) out.weak_null = false;
  }
  if (out.worst_slope == -1e9) out.worst_slope = 0.0;
  return out;
}

}  // namespace

std::vector<ScalarField> weak_null_battery(const GridSpec& xspec, int count) {
  const std::size_t d = xspec.dim_x();
  const ScalarField window = ScalarField::sample(xspec, [&](std::span<const double> x) {
    double v = 1.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const double s = std::sin(kPi * x[a] / xspec.extent(a));
      v *= s * s;
    }
    return cplx{v, 0.0};
  });
  std::vector<ScalarField> battery;
  battery.reserve(std::size_t(count));
  for (int g = 0; g < count; ++g) {
    const std::size_t axis = std::size_t(g) % d;
    const long rank = g / int(d);
    const long mode = (rank % 2 == 0 ? 1 : -1) * ((rank + 1) / 2);
    battery.push_back(multiply(window, ScalarField::sample(xspec, [&](std::span<const double> x) {
      return std::polar(1.0, kTwoPi * double(mode) * x[axis] / xspec.extent(axis));
    })));
  }
  return battery;
}

FamilyCheck check_family(const ScalarFamily& fam, int battery_size) {
  if (fam.indices.empty()) throw std::invalid_argument("check_family: empty ladder");
  const GridSpec spec = fam(fam.indices.front()).spec();
  return check_family_impl(fam, weak_null_battery(spec, battery_size));
}

FamilyCheck check_family(const PhaseFamily& fam, int battery_size) {
  if (fam.indices.empty()) throw std::invalid_argument("check_family: empty ladder");
  const GridSpec spec = fam(fam.indices.front()).spec();
  const auto gx = weak_null_battery(spec.x_only(), battery_size);
  const auto gy = weak_null_battery(spec.y_only(), battery_size);
  std::vector<PhaseSpaceField> battery;
  for (int g = 0; g < battery_size; ++g)
    battery.push_back(tensor(gx[std::size_t(g)], gy[std::size_t(g)], spec));
  return check_family_impl(fam, battery);
}

// ---- generators -------------------------------------------------------------------

ScalarFamily oscillation(std::vector<long> k, ScalarField profile,
                         std::vector<int> indices) {
  const GridSpec spec = profile.spec();
  if (k.size() != spec.dim_x())
    throw std::invalid_argument("oscillation: direction rank mismatch");
  bool nonzero = false;
  for (long kj : k) nonzero = nonzero || kj != 0;
  if (!nonzero) throw std::invalid_argument("oscillation: k must be nonzero");
  for (int n : indices)
    for (std::size_t a = 0; a < k.size(); ++a)
      if (std::labs(long(n) * k[a]) >= long(spec.samples(a)) / 2)
        throw std::invalid_argument("oscillation: n*k reaches the Nyquist row");

  ScalarFamily fam;
  fam.label = "oscillation";
  fam.p_bound = 2.0;
  fam.indices = std::move(indices);
  fam.generator = [spec, k = std::move(k), profile = std::move(profile)](int n) {
    ScalarField out(spec);
    const std::size_t d = spec.dim_x();
    std::vector<std::size_t> idx(d);
    for (std::size_t i = 0; i < out.size(); ++i) {
      spec.decode(i, 0, d, idx.data());
      double phase = 0.0;
      for (std::size_t a = 0; a < d; ++a)
        phase += double(n) * double(k[a]) * spec.coord(a, idx[a]) / spec.extent(a);
      out[i] = std::polar(1.0, kTwoPi * phase) * profile[i];
    }
    return out;
  };
  return fam;
}

ScalarFamily concentration(const GridSpec& xspec,
                           std::function<cplx(std::span<const double>)> profile,
                           double support_radius, std::vector<double> center,
                           double p, std::vector<int> indices) {
  if (center.size() != xspec.dim_x())
    throw std::invalid_argument("concentration: center rank mismatch");
  if (indices.empty()) throw std::invalid_argument("concentration: empty ladder");
  const int n_min = *std::min_element(indices.begin(), indices.end());
  for (std::size_t a = 0; a < xspec.dim_x(); ++a)
    if (support_radius / double(n_min) >= xspec.extent(a) / 2.0)
      throw std::invalid_argument("concentration: support wraps the box");

  ScalarFamily fam;
  fam.label = "concentration";
  fam.p_bound = p;
  fam.indices = std::move(indices);
  const double d = double(xspec.dim_x());
  fam.generator = [xspec, profile = std::move(profile), center = std::move(center), p,
                   d](int n) {
    const double amp = std::pow(double(n), d / p);
    ScalarField out(xspec);
    const std::size_t dim = xspec.dim_x();
    std::vector<std::size_t> idx(dim);
    std::vector<double> s(dim);
    for (std::size_t i = 0; i < out.size(); ++i) {
      xspec.decode(i, 0, dim, idx.data());
      for (std::size_t a = 0; a < dim; ++a) {
        double delta = xspec.coord(a, idx[a]) - center[a];
        const double L = xspec.extent(a);
        delta -= L * std::round(delta / L);  // nearest periodic image
        s[a] = double(n) * delta;
      }
      out[i] = amp * profile(s);
    }
    return out;
  };
  return fam;
}

TransportFamily transport_wave(const GridSpec& spec, const ScalarField& a_of_y,
                               std::function<cplx(double)> w, long w_max_mode,
                               const std::optional<Window>& window,
                               const std::optional<ScalarField>& y_window,
                               std::vector<int> indices) {
  if (spec.dim_x() != 2)
    throw std::invalid_argument("transport_wave: x axes must be (t, x)");
  if (spec.dim_y() == 0)
    throw std::invalid_argument("transport_wave: needs at least one y axis");
  if (a_of_y.spec() != spec.y_only())
    throw std::invalid_argument("transport_wave: coefficient grid mismatch");
  if (y_window && y_window->spec() != spec.y_only())
    throw std::invalid_argument("transport_wave: y-window grid mismatch");
  double a_sup = 0.0;
  for (std::size_t iy = 0; iy < a_of_y.size(); ++iy)
    a_sup = std::max(a_sup, std::abs(a_of_y[iy]));
  for (int n : indices) {
    if (long(n) * w_max_mode >= long(spec.samples(1)) / 2)
      throw std::invalid_argument("transport_wave: n * w bandwidth reaches Nyquist in x");
    // the characteristic w(n (x - a t)/L_x) oscillates in t at frequency
    // n |a| w_max_mode L_t / L_x
    const double t_freq =
        double(n) * double(w_max_mode) * a_sup * spec.extent(0) / spec.extent(1);
    if (t_freq >= double(spec.samples(0)) / 2.0)
      throw std::invalid_argument("transport_wave: characteristic reaches Nyquist in t");
  }

  const double Lx = spec.extent(1);

  auto field_for = [spec, a_of_y, w, window, y_window, Lx](
                       int n, bool as_source) {
    PhaseSpaceField out(spec);
    const std::size_t ytot = spec.y_total();
    std::vector<std::size_t> xi(2);
    std::vector<double> tx(2);
    for (std::size_t ix = 0; ix < spec.x_total(); ++ix) {
      spec.decode(ix, 0, 2, xi.data());
      tx[0] = spec.coord(0, xi[0]);
      tx[1] = spec.coord(1, xi[1]);
      cplx wv{1.0, 0.0}, wdt{0.0, 0.0}, wdx{0.0, 0.0};
      if (window) {
        wv = window->value(tx);
        if (as_source) {
          wdt = window->dt(tx);
          wdx = window->dx(tx);
        }
      }
      for (std::size_t iy = 0; iy < ytot; ++iy) {
        const cplx a = a_of_y[iy];
        const cplx phase_arg = double(n) * (tx[1] - a * tx[0]) / Lx;
        // coefficients are real-valued samples; keep the real part of a for
        // the characteristic argument
        const cplx wave = w(phase_arg.real());
        cplx v;
        if (as_source) {
          v = wave * (wdt + a * wdx);
        } else {
          v = wave * wv;
        }
        if (y_window) v *= (*y_window)[iy];
        out[ix * ytot + iy] = v;
      }
    }
    return out;
  };

  TransportFamily out;
  out.windowed = window.has_value();
  out.family.label = "transport_wave";
  out.family.p_bound = 2.0;
  out.family.indices = indices;
  out.family.generator = [field_for](int n) { return field_for(n, false); };
  out.source.label = "transport_wave_source";
  out.source.p_bound = 2.0;
  out.source.indices = indices;
  const bool windowed = out.windowed;
  out.source.generator = [field_for, spec, windowed](int n) {
    if (!windowed) return PhaseSpaceField(spec);
    return field_for(n, true);
  };
  return out;
}

// ---- truncation / bands ---------------------------------------------------------

namespace {
template <class FieldT>
FieldT truncate_impl(const FieldT& u, double l) {
  std::vector<cplx> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = std::abs(u[i]) <= l ? u[i] : cplx{0.0, 0.0};
  return FieldT(u.spec(), std::move(out));
}

template <class FieldT>
FieldT band_impl(const FieldT& u, long l) {
  if (l < 0) throw std::invalid_argument("band: l must be non-negative");
  std::vector<cplx> out(u.size());
  const double lo = double(l), hi = double(l + 1);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = std::abs(u[i]);
    out[i] = (a > lo && a <= hi) ? u[i] : cplx{0.0, 0.0};
  }
  return FieldT(u.spec(), std::move(out));
}
}  // namespace

ScalarField truncate(const ScalarField& u, double l) { return truncate_impl(u, l); }
PhaseSpaceField truncate(const PhaseSpaceField& u, double l) { return truncate_impl(u, l); }
ScalarField band(const ScalarField& u, long l) { return band_impl(u, l); }
PhaseSpaceField band(const PhaseSpaceField& u, long l) { return band_impl(u, l); }

// ---- tail report ----------------------------------------------------------------

namespace {
template <class FamilyT>
std::vector<TailRow> tail_report_impl(const FamilyT& fam, std::span<const double> ls) {
  if (!(fam.p_bound > 1.0))
    throw std::invalid_argument("tail_report: family must be bounded in L^p, p > 1");
  const double pp = fam.p_bound / (fam.p_bound - 1.0);
  std::vector<TailRow> rows(ls.size());
  for (std::size_t i = 0; i < ls.size(); ++i) rows[i].l = ls[i];
  for (int n : fam.indices) {
    const auto u = fam(n);
    const double cell = u.spec().cell_volume();
    const double up = lp_norm(u, fam.p_bound);
    for (std::size_t i = 0; i < ls.size(); ++i) {
      double tail = 0.0;
      std::size_t count = 0;
      for (std::size_t j = 0; j < u.size(); ++j) {
        const double a = std::abs(u[j]);
        if (a > ls[i]) {
          tail += a;
          ++count;
        }
      }
      rows[i].sup_tail = std::max(rows[i].sup_tail, tail * cell);
      rows[i].sup_holder =
          std::max(rows[i].sup_holder, std::pow(double(count) * cell, 1.0 / pp) * up);
    }
  }
  return rows;
}
}  // namespace

std::vector<TailRow> tail_report(const ScalarFamily& fam, std::span<const double> ls) {
  return tail_report_impl(fam, ls);
}
std::vector<TailRow> tail_report(const PhaseFamily& fam, std::span<const double> ls) {
  return tail_report_impl(fam, ls);
}

std::vector<double> dual_sobolev_report(const PhaseFamily& G, double s,
                                        const Anisotropy& aniso, double q) {
  std::vector<double> out;
  out.reserve(G.indices.size());
  for (int n : G.indices) {
    const PhaseSpaceField g = G(n);
    const GridSpec xspec = g.spec().x_only();
    const MultiplierOp bessel = bessel_op(xspec, s, aniso);
    const std::size_t ytot = g.spec().y_total();
    const double ycell = g.spec().y_cell_volume();
    double acc = 0.0;
    std::vector<cplx> slice(xspec.total());
    for (std::size_t iy = 0; iy < ytot; ++iy) {
      for (std::size_t ix = 0; ix < slice.size(); ++ix) slice[ix] = g.at(ix, iy);
      acc += lp_norm(apply(bessel, ScalarField(xspec, slice)), q);
    }
    out.push_back(acc * ycell);
  }
  return out;
}

}  // namespace defectlab
