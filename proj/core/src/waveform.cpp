#include "cebeam/waveform.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

double CodedPulse::energy() const {
  double e = 0.0;
  for (double s : samples) e += s * s;
  return e / fs;
}

double CodedPulse::amplitude(double t) const {
  if (t < 0.0 || t >= duration) return 0.0;
  if (window.kind == Window::rectangular) return 1.0;
  return dsp::tukey(t / duration, window.taper);
}

double CodedPulse::phase(double t) const {
  return 2.0 * std::numbers::pi *
         ((f0 - 0.5 * bandwidth) * t + (bandwidth / (2.0 * duration)) * t * t);
}

double CodedPulse::value(double t, double carrier_shift) const {
  if (t < 0.0 || t >= duration) return 0.0;
  const double ph = phase(t) - 2.0 * std::numbers::pi * carrier_shift * t;
  return amplitude(t) * std::cos(ph);
}

CodedPulse make_linear_fm(double f0, double bandwidth, double duration, double fs,
                          WindowSpec window) {
  if (bandwidth <= 0.0) throw std::invalid_argument("make_linear_fm: bandwidth must be > 0");
  if (duration <= 0.0) throw std::invalid_argument("make_linear_fm: duration must be > 0");
  if (fs <= 2.0 * (f0 + 0.5 * bandwidth))
    throw std::invalid_argument("make_linear_fm: fs must exceed 2*(f0 + B/2)");

  CodedPulse p;
  p.f0 = f0;
  p.bandwidth = bandwidth;
  p.duration = duration;
  p.fs = fs;
  p.window = window;
  const auto n = static_cast<std::size_t>(std::llround(duration * fs));
  p.samples.resize(n);
  for (std::size_t j = 0; j < n; ++j) p.samples[j] = p.value(static_cast<double>(j) / fs);
  return p;
}

std::vector<double> matched_filter(const CodedPulse& p) {
  if (p.samples.empty()) throw std::invalid_argument("matched_filter: empty pulse");
  return {p.samples.rbegin(), p.samples.rend()};
}

namespace {

// Cross-correlation sum_j a[j] b[j-lag] / fs over all lags, via the
// frequency domain. a and b share length n; output length 2n-1, lag zero
// at index n-1.
std::vector<double> xcorr_scaled(std::span<const double> a, std::span<const double> b, double fs) {
  std::vector<double> b_rev(b.rbegin(), b.rend());
  auto conv = dsp::convolve_full(a, b_rev);
  for (double& v : conv) v /= fs;
  return conv;
}

}  // namespace

Autocorrelation autocorrelation(const CodedPulse& p) {
  if (p.samples.empty()) throw std::invalid_argument("autocorrelation: empty pulse");
  Autocorrelation r;
  r.fs = p.fs;
  r.values = xcorr_scaled(p.samples, p.samples, p.fs);
  return r;
}

AmbiguityMap ambiguity(const CodedPulse& p, std::span<const double> shifts_hz) {
  if (p.samples.empty()) throw std::invalid_argument("ambiguity: empty pulse");
  for (double f : shifts_hz)
    if (std::abs(f) > p.bandwidth)
      throw std::invalid_argument("ambiguity: shift grid must stay within +/-B");

  const std::size_t n = p.length();
  AmbiguityMap map;
  map.shifts.assign(shifts_hz.begin(), shifts_hz.end());
  map.delays.resize(2 * n - 1);
  for (std::size_t i = 0; i < map.delays.size(); ++i)
    map.delays[i] = (static_cast<double>(i) - static_cast<double>(n - 1)) / p.fs;

  map.values.reserve(map.shifts.size());
  std::vector<double> shifted(n);
  for (double f : map.shifts) {
    for (std::size_t j = 0; j < n; ++j)
      shifted[j] = p.value(static_cast<double>(j) / p.fs, f);
    auto row = xcorr_scaled(shifted, p.samples, p.fs);
    for (double& v : row) v = std::abs(v);
    map.values.push_back(std::move(row));
  }
  return map;
}

void export_waveform(const std::filesystem::path& path, const CodedPulse& p) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < p.length(); ++j) {
    out << dsp::format_double(static_cast<double>(j) / p.fs) << ' '
        << dsp::format_double(p.samples[j]) << '\n';
  }
  if (!out) throw io_error("write failed: " + path.string());
}

WaveformTable import_waveform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path.string());
  WaveformTable t;
  double time = 0.0, amp = 0.0;
  while (in >> time >> amp) {
    t.times.push_back(time);
    t.amplitudes.push_back(amp);
  }
  return t;
}

}  // namespace cebeam
