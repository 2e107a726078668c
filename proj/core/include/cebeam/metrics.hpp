#pragma once

#include <span>
#include <string>
#include <vector>

#include "cebeam/tdbf.hpp"

namespace cebeam {

/// Point-spread-function measurements for one reflector. Axial fields come
/// from measure_axial_psf, lateral fields from measure_lateral_psf; unset
/// fields are NaN.
struct PsfReport {
  double axial_width_s = 0.0;
  double axial_width_mm = 0.0;
  double lateral_width_rad = 0.0;
  double lateral_width_mm = 0.0;
  double peak_sidelobe_db = 0.0;
  double depth_mm = 0.0;
  std::string method;
};

/// Multiplication counts per scan line (model of the two processing paths).
struct ComplexityReport {
  double n_focus = 0.0;       // frequency-domain path
  double n_pre = 0.0;         // time-domain pre-compression path
  double n_saved = 0.0;       // post- vs pre-compression saving
  double ratio = 0.0;         // n_pre / n_focus
  std::size_t elements = 0;   // M
  std::size_t samples = 0;    // N_s
  std::size_t filter_len = 0; // N_h
  std::size_t band = 0;       // K
  std::size_t window = 0;     // N_q
  double log_base = 2.0;
};

/// Half-power (-3 dB on the envelope) width of the main lobe around the
/// global peak, with linear interpolation of the crossings. dx is the
/// profile's sample spacing. Throws measurement_error when there is no
/// usable peak or a crossing is missing.
double half_power_width(std::span<const double> envelope, double dx);

/// Max envelope outside the main lobe's first nulls, in dB re the peak.
double peak_sidelobe_db(std::span<const double> envelope);

/// Axial PSF of a line holding one dominant reflector.
PsfReport measure_axial_psf(const BeamLine& line, double sound_speed);

/// Lateral PSF across a sorted theta fan at the given depth.
PsfReport measure_lateral_psf(std::span<const BeamLine> lines, double depth_mm,
                              double sound_speed);

/// Closed-form multiplication counts:
///   n_focus = M K N_q + (N_s/2) log(N_s)
///   n_pre   = M N_s + M (1.5 (N_s+N_h) log(N_s+N_h) + N_s + N_h)
///   n_saved = (M-1) (1.5 (N_s+N_h) log(N_s+N_h) + N_s + N_h)
ComplexityReport complexity_model(std::size_t elements, std::size_t samples,
                                  std::size_t filter_len, std::size_t band, std::size_t window,
                                  double log_base = 2.0);

}  // namespace cebeam
