#include "cebeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

namespace {

std::size_t peak_index(std::span<const double> env) {
  if (env.size() < 3) throw measurement_error("profile too short");
  std::size_t p = 0;
  for (std::size_t i = 1; i < env.size(); ++i)
    if (env[i] > env[p]) p = i;
  if (!(env[p] > 0.0) || !std::isfinite(env[p]))
    throw measurement_error("no peak above the noise floor");
  return p;
}

}  // namespace

double half_power_width(std::span<const double> env, double dx) {
  const std::size_t p = peak_index(env);
  const double half = env[p] / std::numbers::sqrt2;

  std::size_t i = p;
  while (i > 0 && env[i] > half) --i;
  if (env[i] > half) throw measurement_error("left half-power crossing not bracketed");
  const double left =
      static_cast<double>(i) + (half - env[i]) / (env[i + 1] - env[i]);

  i = p;
  while (i + 1 < env.size() && env[i] > half) ++i;
  if (env[i] > half) throw measurement_error("right half-power crossing not bracketed");
  const double right =
      static_cast<double>(i - 1) + (env[i - 1] - half) / (env[i - 1] - env[i]);

  return (right - left) * dx;
}

double peak_sidelobe_db(std::span<const double> env) {
  const std::size_t p = peak_index(env);

  // walk to the first local minimum on each side
  std::size_t r = p;
  while (r + 1 < env.size() && env[r + 1] < env[r]) ++r;
  std::size_t l = p;
  while (l > 0 && env[l - 1] < env[l]) --l;

  double best = 0.0;
  bool seen = false;
  for (std::size_t i = 0; i < l; ++i) {
    best = std::max(best, env[i]);
    seen = true;
  }
  for (std::size_t i = r + 1; i < env.size(); ++i) {
    best = std::max(best, env[i]);
    seen = true;
  }
  if (!seen || best <= 0.0) throw measurement_error("no sidelobe region outside the main lobe");
  return 20.0 * std::log10(best / env[p]);
}

PsfReport measure_axial_psf(const BeamLine& line, double sound_speed) {
  const auto env = dsp::analytic_envelope(line.samples);
  PsfReport r;
  r.axial_width_s = half_power_width(env, 1.0 / line.fs);
  r.axial_width_mm = r.axial_width_s * sound_speed / 2.0 * 1e3;
  r.peak_sidelobe_db = peak_sidelobe_db(env);
  std::size_t p = 0;
  for (std::size_t i = 1; i < env.size(); ++i)
    if (env[i] > env[p]) p = i;
  r.depth_mm = static_cast<double>(p) / line.fs * sound_speed / 2.0 * 1e3;
  r.lateral_width_rad = std::numeric_limits<double>::quiet_NaN();
  r.lateral_width_mm = std::numeric_limits<double>::quiet_NaN();
  return r;
}

PsfReport measure_lateral_psf(std::span<const BeamLine> lines, double depth_mm,
                              double sound_speed) {
  if (lines.size() < 2) throw measurement_error("lateral PSF needs at least two scan lines");
  const double dtheta = lines[1].theta - lines[0].theta;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double step = lines[i].theta - lines[i - 1].theta;
    if (!(step > 0.0))
      throw std::invalid_argument("measure_lateral_psf: theta grid must be sorted");
    if (std::abs(step - dtheta) > 1e-9 * std::max(std::abs(dtheta), 1e-12))
      throw std::invalid_argument("measure_lateral_psf: theta grid must be uniform");
  }

  const double fs = lines.front().fs;
  const auto sample =
      static_cast<std::size_t>(std::llround(fs * 2.0 * depth_mm * 1e-3 / sound_speed));
  std::vector<double> profile(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto env = dsp::analytic_envelope(lines[i].samples);
    if (sample >= env.size()) throw measurement_error("depth outside the scan line");
    profile[i] = env[sample];
  }
  const std::size_t p = peak_index(profile);
  PsfReport r;
  double lo = 1e300;
  for (double v : profile) lo = std::min(lo, v);
  if (lo > profile[p] / std::numbers::sqrt2) {
    // no focusing: the profile never drops to half power inside the grid
    r.lateral_width_rad = lines.back().theta - lines.front().theta;
  } else {
    if (p == 0 || p + 1 == profile.size())
      throw measurement_error("scatterer direction not bracketed by the theta grid");
    r.lateral_width_rad = half_power_width(profile, dtheta);
  }
  r.lateral_width_mm = r.lateral_width_rad * depth_mm;
  r.depth_mm = depth_mm;
  r.axial_width_s = std::numeric_limits<double>::quiet_NaN();
  r.axial_width_mm = std::numeric_limits<double>::quiet_NaN();
  r.peak_sidelobe_db = std::numeric_limits<double>::quiet_NaN();
  return r;
}

ComplexityReport complexity_model(std::size_t elements, std::size_t samples,
                                  std::size_t filter_len, std::size_t band, std::size_t window,
                                  double log_base) {
  if (elements < 1 || samples < 1 || filter_len < 1 || band < 1 || window < 1)
    throw std::invalid_argument("complexity_model: all counts must be >= 1");

  const double m = static_cast<double>(elements);
  const double ns = static_cast<double>(samples);
  const double nh = static_cast<double>(filter_len);
  const double k = static_cast<double>(band);
  const double nq = static_cast<double>(window);
  const auto logb = [log_base](double x) { return std::log(x) / std::log(log_base); };

  ComplexityReport r;
  r.elements = elements;
  r.samples = samples;
  r.filter_len = filter_len;
  r.band = band;
  r.window = window;
  r.log_base = log_base;
  r.n_focus = m * k * nq + ns / 2.0 * logb(ns);
  const double mf_cost = 1.5 * (ns + nh) * logb(ns + nh) + ns + nh;
  r.n_pre = m * ns + m * mf_cost;
  r.n_saved = (m - 1.0) * mf_cost;
  r.ratio = r.n_pre / r.n_focus;
  return r;
}

}  // namespace cebeam
