#include "defectlab/expressions.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace defectlab {

double bump_profile(double s) {
  return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
}

FieldFn make_expression(const nlohmann::json& spec, std::span<const double> extents) {
  const std::string kind = spec.at("kind").get<std::string>();
  if (kind == "constant") {
    const auto v = spec.at("value");
    const cplx c{v.at(0).get<double>(), v.at(1).get<double>()};
    return [c](std::span<const double>) { return c; };
  }
  if (kind == "coordinate") {
    const std::size_t axis = spec.at("axis").get<std::size_t>();
    return [axis](std::span<const double> x) { return cplx{x[axis], 0.0}; };
  }
  if (kind == "polynomial") {
    const std::size_t axis = spec.at("axis").get<std::size_t>();
    const auto coeffs = spec.at("coeffs").get<std::vector<double>>();
    return [axis, coeffs](std::span<const double> x) {
      double acc = 0.0, pw = 1.0;
      for (double c : coeffs) {
        acc += c * pw;
        pw *= x[axis];
      }
      return cplx{acc, 0.0};
    };
  }
  if (kind == "trig") {
    struct Mode {
      std::vector<double> k;
      cplx amp;
    };
    std::vector<Mode> modes;
    for (const auto& m : spec.at("modes")) {
      Mode mode;
      mode.k = m.at("k").get<std::vector<double>>();
      const auto a = m.at("amp");
      mode.amp = {a.at(0).get<double>(), a.at(1).get<double>()};
      modes.push_back(std::move(mode));
    }
    std::vector<double> L(extents.begin(), extents.end());
    return [modes, L](std::span<const double> x) {
      cplx acc{0.0, 0.0};
      for (const auto& m : modes) {
        double phase = 0.0;
        for (std::size_t a = 0; a < x.size(); ++a) phase += m.k.at(a) * x[a] / L.at(a);
        acc += m.amp * std::polar(1.0, kTwoPi * phase);
      }
      return acc;
    };
  }
  if (kind == "bump") {
    const auto center = spec.at("center").get<std::vector<double>>();
    const auto halfwidth = spec.at("halfwidth").get<std::vector<double>>();
    const double amp = spec.value("amplitude", 1.0);
    return [center, halfwidth, amp](std::span<const double> x) {
      double v = amp;
      for (std::size_t a = 0; a < x.size(); ++a)
        v *= bump_profile((x[a] - center.at(a)) / halfwidth.at(a));
      return cplx{v, 0.0};
    };
  }
  if (kind == "sin_power") {
    const int q = spec.at("q").get<int>();
    const double amp = spec.value("amplitude", 1.0);
    std::vector<double> L(extents.begin(), extents.end());
    return [q, amp, L](std::span<const double> x) {
      double v = amp;
      for (std::size_t a = 0; a < x.size(); ++a)
        v *= std::pow(std::sin(kPi * x[a] / L.at(a)), 2.0 * q);
      return cplx{v, 0.0};
    };
  }
  throw std::invalid_argument("make_expression: unknown kind '" + kind + "'");
}

ScalarField sample_expression(const GridSpec& xspec, const nlohmann::json& spec) {
  const FieldFn fn = make_expression(spec, xspec.extents());
  return ScalarField::sample(xspec, fn);
}

PhaseSpaceField sample_expression_phase(const GridSpec& spec,
                                        const nlohmann::json& spec_json) {
  const FieldFn fn = make_expression(spec_json, spec.extents());
  return PhaseSpaceField::sample(
      spec, [&fn, &spec](std::span<const double> x, std::span<const double> y) {
        std::vector<double> full(spec.dim());
        for (std::size_t a = 0; a < x.size(); ++a) full[a] = x[a];
        for (std::size_t a = 0; a < y.size(); ++a) full[x.size() + a] = y[a];
        return fn(full);
      });
}

// ---- field files -------------------------------------------------------------------

namespace {
template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("field file: truncated");
  return v;
}

GridSpec read_header(std::istream& is) {
  const std::uint32_t dx = get<std::uint32_t>(is);
  const std::uint32_t dy = get<std::uint32_t>(is);
  const std::size_t rank = dx + dy;
  if (rank == 0 || rank > 8) throw std::runtime_error("field file: bad rank");
  std::vector<double> extent(rank);
  for (auto& e : extent) e = get<double>(is);
  std::vector<std::size_t> samples(rank);
  for (auto& n : samples) n = std::size_t(get<std::uint64_t>(is));
  return GridSpec(std::move(extent), std::move(samples), dx);
}
}  // namespace

void write_field_file(const std::string& path, const GridSpec& spec,
                      std::span<const cplx> values) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("field file: cannot open " + path);
  put<std::uint32_t>(os, std::uint32_t(spec.dim_x()));
  put<std::uint32_t>(os, std::uint32_t(spec.dim_y()));
  for (std::size_t a = 0; a < spec.dim(); ++a) put<double>(os, spec.extent(a));
  for (std::size_t a = 0; a < spec.dim(); ++a)
    put<std::uint64_t>(os, std::uint64_t(spec.samples(a)));
  for (const cplx& z : values) {
    put<double>(os, z.real());
    put<double>(os, z.imag());
  }
  if (!os) throw std::runtime_error("field file: write failed for " + path);
}

void write_field_file(const std::string& path, const ScalarField& f) {
  write_field_file(path, f.spec(), f.values());
}

void write_field_file(const std::string& path, const PhaseSpaceField& f) {
  write_field_file(path, f.spec(), f.values());
}

ScalarField read_scalar_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field file: cannot open " + path);
  const GridSpec spec = read_header(is);
  if (spec.dim_y() != 0)
    throw std::runtime_error("field file: expected an x-only field in " + path);
  std::vector<cplx> v(spec.total());
  for (auto& z : v) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    z = {re, im};
  }
  return ScalarField(spec, std::move(v));
}

PhaseSpaceField read_phase_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("field file: cannot open " + path);
  const GridSpec spec = read_header(is);
  std::vector<cplx> v(spec.total());
  for (auto& z : v) {
    const double re = get<double>(is);
    const double im = get<double>(is);
    z = {re, im};
  }
  return PhaseSpaceField(spec, std::move(v));
}

}  // namespace defectlab
