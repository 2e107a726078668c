#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace cebeam {

/// Amplitude taper applied to the transmit pulse.
enum class Window { rectangular, tapered_cosine };

struct WindowSpec {
  Window kind = Window::tapered_cosine;
  double taper = 0.10;  // fraction of the pulse spent in the cosine ramps
};

/// A sampled coded excitation pulse together with its design parameters.
///
/// `samples[j]` holds the transmit waveform at t = j/fs. The waveform is a
/// windowed linear FM sweep from f0-B/2 at t=0 to f0+B/2 at t=Tp; outside
/// [0, Tp) it is identically zero. value() evaluates the same analytic
/// expression at arbitrary (fractional) times, which synthesis uses to place
/// echoes with sub-sample delays.
struct CodedPulse {
  double f0 = 0.0;         // carrier frequency [Hz]
  double bandwidth = 0.0;  // sweep bandwidth B [Hz]
  double duration = 0.0;   // pulse length Tp [s]
  double fs = 0.0;         // sample rate [Hz]
  WindowSpec window;
  std::vector<double> samples;

  std::size_t length() const { return samples.size(); }

  /// Time-bandwidth product D = Tp*B.
  double time_bandwidth() const { return duration * bandwidth; }

  /// sum |s|^2 / fs.
  double energy() const;

  /// Window amplitude a(t).
  double amplitude(double t) const;

  /// Total instantaneous phase 2*pi*((f0-B/2)t + (B/2Tp)t^2).
  double phase(double t) const;

  /// Waveform value at arbitrary time; `carrier_shift` lowers the carrier
  /// frequency while preserving the complex envelope.
  double value(double t, double carrier_shift = 0.0) const;
};

/// Two-sided sampled autocorrelation over lags [-(Nh-1), Nh-1] / fs,
/// scaled by 1/fs so lag zero equals the pulse energy.
struct Autocorrelation {
  std::vector<double> values;
  double fs = 0.0;

  std::size_t zero_index() const { return values.size() / 2; }
  double lag_seconds(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(zero_index())) / fs;
  }
};

/// |A(t,f)|: matched-filter response magnitude to frequency-shifted copies
/// of the pulse. Row i corresponds to shifts[i]; the f=0 row equals the
/// magnitude of the autocorrelation. A positive shift (carrier downshift)
/// displaces the response peak of an up-sweep to positive delay +f*Tp/B.
struct AmbiguityMap {
  std::vector<double> delays;               // [s]
  std::vector<double> shifts;               // [Hz]
  std::vector<std::vector<double>> values;  // shifts.size() x delays.size()
};

/// Build a linear FM pulse. Throws std::invalid_argument when
/// fs <= 2*(f0+B/2), Tp <= 0 or B <= 0.
CodedPulse make_linear_fm(double f0, double bandwidth, double duration, double fs,
                          WindowSpec window = {});

/// Conjugated, time-reversed pulse samples (real pulses: just reversed).
std::vector<double> matched_filter(const CodedPulse& p);

Autocorrelation autocorrelation(const CodedPulse& p);

/// Shifts must stay within [-B, B].
AmbiguityMap ambiguity(const CodedPulse& p, std::span<const double> shifts_hz);

/// Two-column text export (time_s amplitude), one sample per line.
void export_waveform(const std::filesystem::path& path, const CodedPulse& p);

struct WaveformTable {
  std::vector<double> times;
  std::vector<double> amplitudes;
};

WaveformTable import_waveform(const std::filesystem::path& path);

}  // namespace cebeam
