#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cebeam/scene.hpp"

namespace cebeam {

enum class LineKind : std::uint32_t {
  uncoded = 1,
  pre_compression = 2,
  post_compression = 3,
  focus = 4,
};

/// One beamformed scan line.
struct BeamLine {
  double theta = 0.0;
  std::vector<double> samples;
  double fs = 0.0;
  LineKind kind = LineKind::uncoded;
};

/// Multiplication tally for the empirical complexity cross-check. Loop work
/// is counted from executed trip counts; FFT stages are booked at the
/// radix-2 butterfly count (n/2 log2 n) of the transforms actually run.
struct MultTally {
  std::uint64_t multiplications = 0;
};

/// End of the valid output window, T_B(theta) = min_m tau_m^{-1}(T; theta).
double beam_window_end(const ArrayGeometry& g, double window, double theta);

/// Dynamic-focus delay-and-sum with linear interpolation; output samples at
/// or past T_B(theta) are zero.
BeamLine beamform_time(const ChannelFrame& f, const ArrayGeometry& g, double theta);

/// Matched filter applied per channel, then delay-and-sum. The convolution
/// is realigned so an echo at round-trip time t peaks at sample round(fs*t).
BeamLine beamform_pre_compression(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                  std::span<const double> mf, MultTally* tally = nullptr);

/// Delay-and-sum first, one matched filter on the beam (same alignment).
BeamLine beamform_post_compression(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                   std::span<const double> mf);

void save_beam_line(const std::filesystem::path& path, const BeamLine& line);
BeamLine load_beam_line(const std::filesystem::path& path);

}  // namespace cebeam
