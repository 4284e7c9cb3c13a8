#include "defectlab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>

namespace defectlab {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Complex-to-complex transform over `rank` leading dimensions, batched over
// `howmany` trailing blocks. Planning is serialized (the FFTW planner is not
// thread safe); execution runs outside the lock.
void run_dft(cplx* data, const std::vector<int>& dims, int howmany,
             int stride, int dist, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan = nullptr;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_many_dft(int(dims.size()), dims.data(), howmany, ptr,
                              nullptr, stride, dist, ptr, nullptr, stride,
                              dist, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fftw plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

void check_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string("grid spec mismatch in ") + what);
}

bool in_region(const GridSpec& spec, std::size_t flat, const Region& region) {
  std::vector<std::size_t> idx(spec.dim());
  spec.decode(flat, 0, spec.dim(), idx.data());
  for (std::size_t a = 0; a < spec.dim(); ++a) {
    const double c = spec.coord(a, idx[a]);
    if (c < region.lo[a] || c >= region.hi[a]) return false;
  }
  return true;
}

template <class FieldT>
double lp_norm_impl(const FieldT& f, double p, const std::optional<Region>& region) {
  if (!(p >= 1.0) && !std::isinf(p)) {
    throw std::invalid_argument("lp_norm: p must be >= 1 or infinity");
  }
  const GridSpec& spec = f.spec();
  if (region) {
    if (region->lo.size() != spec.dim() || region->hi.size() != spec.dim())
      throw std::invalid_argument("lp_norm: region rank mismatch");
  }
  if (std::isinf(p)) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (region && !in_region(spec, i, *region)) continue;
      m = std::max(m, std::abs(f[i]));
    }
    return m;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (region && !in_region(spec, i, *region)) continue;
    acc += std::pow(std::abs(f[i]), p);
  }
  return std::pow(acc * spec.cell_volume(), 1.0 / p);
}

}  // namespace

// ---- GridSpec ---------------------------------------------------------------

GridSpec::GridSpec(std::vector<double> extent, std::vector<std::size_t> samples,
                   std::size_t dim_x)
    : extent_(std::move(extent)), samples_(std::move(samples)), dim_x_(dim_x) {
  if (extent_.size() != samples_.size())
    throw std::invalid_argument("GridSpec: extent/samples rank mismatch");
  if (dim_x_ > extent_.size())
    throw std::invalid_argument("GridSpec: dim_x exceeds rank");
  for (double L : extent_)
    if (!(L > 0.0)) throw std::invalid_argument("GridSpec: extents must be positive");
  for (std::size_t n : samples_)
    if (n < 4 || n % 2 != 0)
      throw std::invalid_argument("GridSpec: sample counts must be even and >= 4");
}

GridSpec GridSpec::x_grid(std::vector<double> extent, std::vector<std::size_t> samples) {
  const std::size_t d = extent.size();
  return GridSpec(std::move(extent), std::move(samples), d);
}

GridSpec GridSpec::phase_grid(std::vector<double> ex, std::vector<std::size_t> nx,
                              std::vector<double> ey, std::vector<std::size_t> ny) {
  const std::size_t d = ex.size();
  ex.insert(ex.end(), ey.begin(), ey.end());
  nx.insert(nx.end(), ny.begin(), ny.end());
  return GridSpec(std::move(ex), std::move(nx), d);
}

std::size_t GridSpec::total() const {
  std::size_t t = 1;
  for (std::size_t n : samples_) t *= n;
  return t;
}

std::size_t GridSpec::x_total() const {
  std::size_t t = 1;
  for (std::size_t a = 0; a < dim_x_; ++a) t *= samples_[a];
  return t;
}

std::size_t GridSpec::y_total() const {
  std::size_t t = 1;
  for (std::size_t a = dim_x_; a < samples_.size(); ++a) t *= samples_[a];
  return t;
}

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < extent_.size(); ++a) v *= step(a);
  return v;
}

double GridSpec::x_cell_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim_x_; ++a) v *= step(a);
  return v;
}

double GridSpec::y_cell_volume() const {
  double v = 1.0;
  for (std::size_t a = dim_x_; a < extent_.size(); ++a) v *= step(a);
  return v;
}

double GridSpec::x_volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim_x_; ++a) v *= extent_[a];
  return v;
}

double GridSpec::y_volume() const {
  double v = 1.0;
  for (std::size_t a = dim_x_; a < extent_.size(); ++a) v *= extent_[a];
  return v;
}

long GridSpec::freq_index(std::size_t axis, std::size_t idx) const {
  const long n = long(samples_[axis]);
  const long j = long(idx);
  return j < n / 2 ? j : j - n;
}

double GridSpec::freq(std::size_t axis, std::size_t idx) const {
  return double(freq_index(axis, idx)) / extent_[axis];
}

GridSpec GridSpec::x_only() const {
  return GridSpec(std::vector<double>(extent_.begin(), extent_.begin() + dim_x_),
                  std::vector<std::size_t>(samples_.begin(), samples_.begin() + dim_x_),
                  dim_x_);
}

GridSpec GridSpec::y_only() const {
  return GridSpec(std::vector<double>(extent_.begin() + dim_x_, extent_.end()),
                  std::vector<std::size_t>(samples_.begin() + dim_x_, samples_.end()),
                  extent_.size() - dim_x_);
}

void GridSpec::decode(std::size_t flat, std::size_t axis_begin,
                      std::size_t axis_end, std::size_t* out) const {
  for (std::size_t a = axis_end; a-- > axis_begin;) {
    const std::size_t n = samples_[a];
    out[a - axis_begin] = flat % n;
    flat /= n;
  }
}

// ---- Fields -----------------------------------------------------------------

ScalarField::ScalarField(GridSpec spec)
    : spec_(std::move(spec)), v_(spec_.total(), cplx{0.0, 0.0}) {
  if (spec_.dim_y() != 0)
    throw std::invalid_argument("ScalarField: spec must not carry y axes");
}

ScalarField::ScalarField(GridSpec spec, std::vector<cplx> values)
    : spec_(std::move(spec)), v_(std::move(values)) {
  if (spec_.dim_y() != 0)
    throw std::invalid_argument("ScalarField: spec must not carry y axes");
  if (v_.size() != spec_.total())
    throw std::invalid_argument("ScalarField: value count mismatch");
}

ScalarField ScalarField::sample(const GridSpec& spec,
                                const std::function<cplx(std::span<const double>)>& f) {
  ScalarField out(spec);
  const std::size_t d = spec.dim();
  std::vector<std::size_t> idx(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < out.size(); ++i) {
    spec.decode(i, 0, d, idx.data());
    for (std::size_t a = 0; a < d; ++a) x[a] = spec.coord(a, idx[a]);
    out[i] = f(x);
  }
  return out;
}

bool ScalarField::all_finite() const {
  for (const cplx& z : v_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

SpectralField::SpectralField(GridSpec spec, std::vector<cplx> coeffs)
    : spec_(std::move(spec)), c_(std::move(coeffs)) {
  if (c_.size() != spec_.x_total())
    throw std::invalid_argument("SpectralField: coefficient count mismatch");
}

namespace {
std::size_t spectral_flat(const GridSpec& spec, std::span<const long> k) {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < spec.dim_x(); ++a) {
    const long n = long(spec.samples(a));
    long j = k[a];
    if (j < -n / 2 || j >= n / 2) throw std::out_of_range("SpectralField: frequency outside lattice");
    if (j < 0) j += n;
    flat = flat * std::size_t(n) + std::size_t(j);
  }
  return flat;
}
}  // namespace

cplx SpectralField::at(std::span<const long> k) const {
  return c_[spectral_flat(spec_, k)];
}

cplx& SpectralField::at_mut(std::span<const long> k) {
  return c_[spectral_flat(spec_, k)];
}

double SpectralField::l2_norm() const {
  double acc = 0.0;
  for (const cplx& z : c_) acc += std::norm(z);
  return std::sqrt(acc * spec_.x_volume());
}

PhaseSpaceField::PhaseSpaceField(GridSpec spec)
    : spec_(std::move(spec)), v_(spec_.total(), cplx{0.0, 0.0}) {}

PhaseSpaceField::PhaseSpaceField(GridSpec spec, std::vector<cplx> values)
    : spec_(std::move(spec)), v_(std::move(values)) {
  if (v_.size() != spec_.total())
    throw std::invalid_argument("PhaseSpaceField: value count mismatch");
}

PhaseSpaceField PhaseSpaceField::sample(
    const GridSpec& spec,
    const std::function<cplx(std::span<const double>, std::span<const double>)>& f) {
  PhaseSpaceField out(spec);
  const std::size_t dx = spec.dim_x(), dy = spec.dim_y();
  const std::size_t ytot = spec.y_total();
  std::vector<std::size_t> xi(dx), yi(dy);
  std::vector<double> x(dx), y(dy);
  for (std::size_t ix = 0; ix < spec.x_total(); ++ix) {
    spec.decode(ix, 0, dx, xi.data());
    for (std::size_t a = 0; a < dx; ++a) x[a] = spec.coord(a, xi[a]);
    for (std::size_t iy = 0; iy < ytot; ++iy) {
      spec.decode(iy, dx, spec.dim(), yi.data());
      for (std::size_t a = 0; a < dy; ++a) y[a] = spec.coord(dx + a, yi[a]);
      out[ix * ytot + iy] = f(x, y);
    }
  }
  return out;
}

bool PhaseSpaceField::all_finite() const {
  for (const cplx& z : v_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// ---- transforms -------------------------------------------------------------

SpectralField forward_transform(const ScalarField& f) {
  std::vector<cplx> buf(f.values().begin(), f.values().end());
  const GridSpec& spec = f.spec();
  std::vector<int> dims;
  for (std::size_t a = 0; a < spec.dim_x(); ++a) dims.push_back(int(spec.samples(a)));
  run_dft(buf.data(), dims, 1, 1, 1, FFTW_FORWARD);
  const double scale = 1.0 / double(spec.x_total());
  for (cplx& z : buf) z *= scale;
  return SpectralField(spec, std::move(buf));
}

ScalarField inverse_transform(const SpectralField& F) {
  std::vector<cplx> buf(F.coeffs().begin(), F.coeffs().end());
  const GridSpec& spec = F.spec();
  std::vector<int> dims;
  for (std::size_t a = 0; a < spec.dim_x(); ++a) dims.push_back(int(spec.samples(a)));
  run_dft(buf.data(), dims, 1, 1, 1, FFTW_BACKWARD);
  return ScalarField(spec, std::move(buf));
}

PhaseSpaceField forward_transform_y(const PhaseSpaceField& f) {
  const GridSpec& spec = f.spec();
  if (spec.dim_y() == 0)
    throw std::invalid_argument("forward_transform_y: field has no y axes");
  std::vector<cplx> buf(f.values().begin(), f.values().end());
  std::vector<int> dims;
  for (std::size_t a = spec.dim_x(); a < spec.dim(); ++a)
    dims.push_back(int(spec.samples(a)));
  const int ytot = int(spec.y_total());
  run_dft(buf.data(), dims, int(spec.x_total()), 1, ytot, FFTW_FORWARD);
  const double scale = 1.0 / double(spec.y_total());
  for (cplx& z : buf) z *= scale;
  return PhaseSpaceField(spec, std::move(buf));
}

// ---- norms ------------------------------------------------------------------

double lp_norm(const ScalarField& f, double p, const std::optional<Region>& region) {
  return lp_norm_impl(f, p, region);
}

double lp_norm(const PhaseSpaceField& f, double p, const std::optional<Region>& region) {
  return lp_norm_impl(f, p, region);
}

double mixed_norm(const PhaseSpaceField& f, double p_inner_x, double q_outer_y) {
  const GridSpec& spec = f.spec();
  const std::size_t xt = spec.x_total(), yt = spec.y_total();
  const double xcell = spec.x_cell_volume(), ycell = spec.y_cell_volume();
  const bool pinf = std::isinf(p_inner_x), qinf = std::isinf(q_outer_y);
  double outer = 0.0;
  for (std::size_t iy = 0; iy < yt; ++iy) {
    double innacc = 0.0;
    for (std::size_t ix = 0; ix < xt; ++ix) {
      const double a = std::abs(f.values()[ix * yt + iy]);
      innacc = pinf ? std::max(innacc, a) : innacc + std::pow(a, p_inner_x);
    }
    const double inner_norm = pinf ? innacc : std::pow(innacc * xcell, 1.0 / p_inner_x);
    outer = qinf ? std::max(outer, inner_norm) : outer + std::pow(inner_norm, q_outer_y);
  }
  return qinf ? outer : std::pow(outer * ycell, 1.0 / q_outer_y);
}

cplx integrate(const ScalarField& f) {
  cplx acc{0.0, 0.0};
  for (const cplx& z : f.values()) acc += z;
  return acc * f.spec().cell_volume();
}

cplx integrate(const PhaseSpaceField& f) {
  cplx acc{0.0, 0.0};
  for (const cplx& z : f.values()) acc += z;
  return acc * f.spec().cell_volume();
}

cplx inner(const ScalarField& f, const ScalarField& g) {
  check_same_spec(f.spec(), g.spec(), "inner");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  return acc * f.spec().cell_volume();
}

cplx inner(const PhaseSpaceField& f, const PhaseSpaceField& g) {
  check_same_spec(f.spec(), g.spec(), "inner");
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < f.size(); ++i) acc += f[i] * std::conj(g[i]);
  return acc * f.spec().cell_volume();
}

// ---- algebra ----------------------------------------------------------------

namespace {
template <class F>
F zip(const F& a, const F& b, cplx (*op)(const cplx&, const cplx&), const char* what) {
  check_same_spec(a.spec(), b.spec(), what);
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return F(a.spec(), std::move(out));
}
cplx add_op(const cplx& x, const cplx& y) { return x + y; }
cplx sub_op(const cplx& x, const cplx& y) { return x - y; }
cplx mul_op(const cplx& x, const cplx& y) { return x * y; }
}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return zip(a, b, add_op, "+"); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return zip(a, b, sub_op, "-"); }
ScalarField multiply(const ScalarField& a, const ScalarField& b) { return zip(a, b, mul_op, "multiply"); }

ScalarField operator*(cplx s, const ScalarField& a) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return ScalarField(a.spec(), std::move(out));
}

ScalarField conjugate(const ScalarField& a) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::conj(a[i]);
  return ScalarField(a.spec(), std::move(out));
}

PhaseSpaceField operator+(const PhaseSpaceField& a, const PhaseSpaceField& b) { return zip(a, b, add_op, "+"); }
PhaseSpaceField operator-(const PhaseSpaceField& a, const PhaseSpaceField& b) { return zip(a, b, sub_op, "-"); }
PhaseSpaceField multiply(const PhaseSpaceField& a, const PhaseSpaceField& b) { return zip(a, b, mul_op, "multiply"); }

PhaseSpaceField operator*(cplx s, const PhaseSpaceField& a) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return PhaseSpaceField(a.spec(), std::move(out));
}

PhaseSpaceField conjugate(const PhaseSpaceField& a) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::conj(a[i]);
  return PhaseSpaceField(a.spec(), std::move(out));
}

PhaseSpaceField multiply_x(const PhaseSpaceField& a, const ScalarField& bx) {
  check_same_spec(a.spec().x_only(), bx.spec(), "multiply_x");
  const std::size_t yt = a.spec().y_total();
  std::vector<cplx> out(a.size());
  for (std::size_t ix = 0; ix < a.spec().x_total(); ++ix)
    for (std::size_t iy = 0; iy < yt; ++iy)
      out[ix * yt + iy] = a.values()[ix * yt + iy] * bx[ix];
  return PhaseSpaceField(a.spec(), std::move(out));
}

PhaseSpaceField multiply_y(const PhaseSpaceField& a, const ScalarField& by) {
  check_same_spec(a.spec().y_only(), by.spec(), "multiply_y");
  const std::size_t yt = a.spec().y_total();
  std::vector<cplx> out(a.size());
  for (std::size_t ix = 0; ix < a.spec().x_total(); ++ix)
    for (std::size_t iy = 0; iy < yt; ++iy)
      out[ix * yt + iy] = a.values()[ix * yt + iy] * by[iy];
  return PhaseSpaceField(a.spec(), std::move(out));
}

PhaseSpaceField broadcast_x(const ScalarField& fx, const GridSpec& phase_spec) {
  check_same_spec(phase_spec.x_only(), fx.spec(), "broadcast_x");
  const std::size_t yt = phase_spec.y_total();
  std::vector<cplx> out(phase_spec.total());
  for (std::size_t ix = 0; ix < phase_spec.x_total(); ++ix)
    for (std::size_t iy = 0; iy < yt; ++iy) out[ix * yt + iy] = fx[ix];
  return PhaseSpaceField(phase_spec, std::move(out));
}

PhaseSpaceField tensor(const ScalarField& fx, const ScalarField& fy,
                       const GridSpec& phase_spec) {
  check_same_spec(phase_spec.x_only(), fx.spec(), "tensor");
  check_same_spec(phase_spec.y_only(), fy.spec(), "tensor");
  const std::size_t yt = phase_spec.y_total();
  std::vector<cplx> out(phase_spec.total());
  for (std::size_t ix = 0; ix < phase_spec.x_total(); ++ix)
    for (std::size_t iy = 0; iy < yt; ++iy) out[ix * yt + iy] = fx[ix] * fy[iy];
  return PhaseSpaceField(phase_spec, std::move(out));
}

// ---- translate --------------------------------------------------------------

ScalarField translate(const ScalarField& f, std::span<const double> h) {
  const GridSpec& spec = f.spec();
  if (h.size() != spec.dim_x())
    throw std::invalid_argument("translate: shift rank mismatch");
  SpectralField F = forward_transform(f);
  std::vector<std::size_t> idx(spec.dim_x());
  for (std::size_t i = 0; i < F.size(); ++i) {
    spec.decode(i, 0, spec.dim_x(), idx.data());
    double phase = 0.0;
    for (std::size_t a = 0; a < spec.dim_x(); ++a)
      phase += spec.freq(a, idx[a]) * h[a];
    F.data()[i] *= std::polar(1.0, -kTwoPi * phase);
  }
  return inverse_transform(F);
}

// ---- Rng --------------------------------------------------------------------

std::uint64_t Rng::next_u64() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return r * std::cos(kTwoPi * u2);
}

cplx Rng::cnormal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

ScalarField random_band_limited(const GridSpec& spec, Rng& rng, long max_mode,
                                bool zero_mean) {
  SpectralField F(spec, std::vector<cplx>(spec.x_total(), cplx{0.0, 0.0}));
  std::vector<std::size_t> idx(spec.dim_x());
  for (std::size_t i = 0; i < F.size(); ++i) {
    spec.decode(i, 0, spec.dim_x(), idx.data());
    bool inside = true;
    bool dc = true;
    for (std::size_t a = 0; a < spec.dim_x(); ++a) {
      const long k = spec.freq_index(a, idx[a]);
      if (std::labs(k) > max_mode) inside = false;
      if (k != 0) dc = false;
    }
    if (!inside) continue;
    if (dc && zero_mean) continue;
    F.data()[i] = rng.cnormal();
  }
  return inverse_transform(F);
}

}  // namespace defectlab
