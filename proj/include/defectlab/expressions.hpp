// expressions.hpp — the whitelist of named closed-form coefficient fields
// used by configs (constant, coordinate, polynomial, trig, bump, sin_power),
// plus the binary sampled-field file format.
//
// Field file layout (little-endian):
//   u32 dim_x, u32 dim_y,
//   f64 extent per axis (x axes first),
//   u64 sample count per axis,
//   body: complex doubles (re, im) row-major, y fastest.

#pragma once

#include <functional>
#include <span>
#include <string>

#include "json.hpp"

#include "defectlab/grid.hpp"

namespace defectlab {

using FieldFn = std::function<cplx(std::span<const double>)>;

/// Build a closed-form field from a JSON expression spec:
///   {"kind":"constant","value":[re,im]}
///   {"kind":"coordinate","axis":j}
///   {"kind":"polynomial","axis":j,"coeffs":[c0,c1,...]}
///   {"kind":"trig","modes":[{"k":[..],"amp":[re,im]}]}   (k in cycles/extent)
///   {"kind":"bump","center":[..],"halfwidth":[..],"amplitude":a}
///   {"kind":"sin_power","q":integer,"amplitude":a}
/// Extents are needed by "trig" and "sin_power"; pass the axis extents the
/// expression will be sampled on.
FieldFn make_expression(const nlohmann::json& spec, std::span<const double> extents);

ScalarField sample_expression(const GridSpec& xspec, const nlohmann::json& spec);
PhaseSpaceField sample_expression_phase(const GridSpec& spec, const nlohmann::json& spec_json);

/// exp(1 - 1/(1-s^2)) on |s| < 1, 0 outside (value 1 at the center).
double bump_profile(double s);

// ---- sampled-field files ---------------------------------------------------------

void write_field_file(const std::string& path, const GridSpec& spec,
                      std::span<const cplx> values);
void write_field_file(const std::string& path, const ScalarField& f);
void write_field_file(const std::string& path, const PhaseSpaceField& f);

ScalarField read_scalar_field(const std::string& path);
PhaseSpaceField read_phase_field(const std::string& path);

}  // namespace defectlab
