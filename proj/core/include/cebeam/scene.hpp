#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cebeam/waveform.hpp"

namespace cebeam {

/// Receive array: signed element offsets from the reference element, which
/// sits at offset zero.
struct ArrayGeometry {
  std::vector<double> offsets;  // delta_m [m], strictly increasing
  std::size_t reference = 0;    // index of the element with offset 0
  double sound_speed = 1540.0;  // [m/s]

  std::size_t size() const { return offsets.size(); }
  double gamma(std::size_t m) const { return offsets[m] / sound_speed; }  // [s]
};

/// Elements on a line with the reference at element ceil(M/2) (1-based).
ArrayGeometry uniform_linear_array(std::size_t elements, double pitch, double sound_speed = 1540.0);

struct Scatterer {
  double range = 0.0;         // [m] from the array center
  double theta = 0.0;         // [rad]
  double reflectivity = 1.0;  // amplitude scale
  double freq_shift = 0.0;    // [Hz] attenuation-induced carrier downshift
};

struct Phantom {
  std::vector<Scatterer> scatterers;
};

/// One scatterer per line: `r_m theta_rad alpha f_shift_hz`. '#' comments.
Phantom load_phantom(const std::filesystem::path& path);
void save_phantom(const std::filesystem::path& path, const Phantom& ph);

/// Echo arrival time at element m for a reflector passed at time t in
/// direction theta: t + sqrt((c t cos)^2 + (delta_m - c t sin)^2) / c.
double arrival_time(const ArrayGeometry& g, std::size_t m, double t, double theta);

/// Dynamic receive delay tau_m(t; theta); arrival_time(t) == delay(2t).
double delay_curve(const ArrayGeometry& g, std::size_t m, double t, double theta);

/// Inverse of delay_curve in its first time argument.
double delay_curve_inverse(const ArrayGeometry& g, std::size_t m, double x, double theta);

/// Per-element received data, elements x samples, row-major.
struct ChannelFrame {
  std::vector<double> data;
  std::size_t elements = 0;
  std::size_t samples = 0;  // N_s = round(T*fs)
  double fs = 0.0;          // [Hz]
  double window = 0.0;      // acquisition window T [s]
  std::vector<std::string> warnings;

  std::span<const double> row(std::size_t m) const {
    return {data.data() + m * samples, samples};
  }
  std::span<double> row(std::size_t m) { return {data.data() + m * samples, samples}; }
};

/// Sum of delayed (sub-sample accurate), frequency-shifted pulse echoes per
/// element, plus white Gaussian noise of the given RMS. Scatterers whose
/// echoes extend past the window are truncated and recorded in warnings.
ChannelFrame synthesize_channels(const ArrayGeometry& g, const Phantom& ph, const CodedPulse& p,
                                 double fs, double window, double noise_rms = 0.0,
                                 std::uint64_t seed = 0);

/// Flat binary container with a 64-byte header; float32 little-endian data.
/// Shared between channel frames (elements >= 1, tag 0) and beam lines.
void save_frame(const std::filesystem::path& path, const ChannelFrame& f);
ChannelFrame load_frame(const std::filesystem::path& path);

}  // namespace cebeam
