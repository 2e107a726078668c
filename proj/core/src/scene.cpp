#include "cebeam/scene.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

ArrayGeometry uniform_linear_array(std::size_t elements, double pitch, double sound_speed) {
  if (elements == 0) throw std::invalid_argument("uniform_linear_array: need at least 1 element");
  if (pitch <= 0.0) throw std::invalid_argument("uniform_linear_array: pitch must be > 0");
  if (sound_speed <= 0.0) throw std::invalid_argument("uniform_linear_array: c must be > 0");

  ArrayGeometry g;
  g.sound_speed = sound_speed;
  g.reference = (elements + 1) / 2 - 1;  // ceil(M/2), 0-based
  g.offsets.resize(elements);
  for (std::size_t m = 0; m < elements; ++m)
    g.offsets[m] = (static_cast<double>(m) - static_cast<double>(g.reference)) * pitch;
  return g;
}

double arrival_time(const ArrayGeometry& g, std::size_t m, double t, double theta) {
  const double c = g.sound_speed;
  const double dm = std::hypot(c * t * std::cos(theta), g.offsets[m] - c * t * std::sin(theta));
  return t + dm / c;
}

double delay_curve(const ArrayGeometry& g, std::size_t m, double t, double theta) {
  const double gm = g.gamma(m);
  // discriminant rewritten as (t - 2 gm sin)^2 + (2 gm cos)^2, always >= 0
  const double root = std::hypot(t - 2.0 * gm * std::sin(theta), 2.0 * gm * std::cos(theta));
  return 0.5 * (t + root);
}

double delay_curve_inverse(const ArrayGeometry& g, std::size_t m, double x, double theta) {
  const double gm = g.gamma(m);
  const double den = x - gm * std::sin(theta);
  assert(den > 0.0 && "delay_curve_inverse: x must exceed gm*sin(theta)");
  return (x * x - gm * gm) / den;
}

Phantom load_phantom(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open phantom file " + path.string());
  Phantom ph;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    Scatterer s;
    if (!(ss >> s.range)) continue;  // blank or comment-only line
    if (!(ss >> s.theta >> s.reflectivity >> s.freq_shift))
      throw config_error(path.string() + ":" + std::to_string(lineno) +
                         ": expected `r_m theta_rad alpha f_shift_hz`");
    if (s.range <= 0.0)
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": range must be > 0");
    if (!std::isfinite(s.reflectivity))
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": non-finite alpha");
    if (s.freq_shift < 0.0)
      throw config_error(path.string() + ":" + std::to_string(lineno) + ": f_shift must be >= 0");
    ph.scatterers.push_back(s);
  }
  return ph;
}

void save_phantom(const std::filesystem::path& path, const Phantom& ph) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  for (const auto& s : ph.scatterers) {
    out << dsp::format_double(s.range) << ' ' << dsp::format_double(s.theta) << ' '
        << dsp::format_double(s.reflectivity) << ' ' << dsp::format_double(s.freq_shift) << '\n';
  }
  if (!out) throw io_error("write failed: " + path.string());
}

ChannelFrame synthesize_channels(const ArrayGeometry& g, const Phantom& ph, const CodedPulse& p,
                                 double fs, double window, double noise_rms, std::uint64_t seed) {
  ChannelFrame f;
  f.elements = g.size();
  f.samples = static_cast<std::size_t>(std::llround(window * fs));
  f.fs = fs;
  // snap to the sample grid so the Fourier interval is exactly N_s/fs
  f.window = static_cast<double>(f.samples) / fs;
  f.data.assign(f.elements * f.samples, 0.0);

  for (const auto& s : ph.scatterers) {
    if (s.freq_shift >= p.bandwidth)
      throw std::invalid_argument("synthesize_channels: f_shift must stay below B");
  }

  for (std::size_t m = 0; m < f.elements; ++m) {
    auto row = f.row(m);
    for (const auto& s : ph.scatterers) {
      const double onset = arrival_time(g, m, s.range / g.sound_speed, s.theta);
      const auto j0 = static_cast<std::size_t>(std::max(0.0, std::floor(onset * fs)));
      const auto j1 = std::min<std::size_t>(
          f.samples, static_cast<std::size_t>(std::ceil((onset + p.duration) * fs)) + 1);
      for (std::size_t j = j0; j < j1; ++j) {
        const double t = static_cast<double>(j) / fs - onset;
        row[j] += s.reflectivity * p.value(t, s.freq_shift);
      }
    }
  }

  for (const auto& s : ph.scatterers) {
    double last = 0.0;
    for (std::size_t m = 0; m < f.elements; ++m)
      last = std::max(last, arrival_time(g, m, s.range / g.sound_speed, s.theta) + p.duration);
    if (last > window) {
      f.warnings.push_back("scatterer at r=" + dsp::format_double(s.range) +
                           " truncated by acquisition window");
    }
  }

  if (noise_rms > 0.0) {
    for (std::size_t m = 0; m < f.elements; ++m) {
      // independent per-element stream so synthesis order never matters
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull * (m + 1)));
      std::normal_distribution<double> gauss(0.0, noise_rms);
      for (double& v : f.row(m)) v += gauss(rng);
    }
  }
  return f;
}

namespace {

constexpr char kFrameMagic[8] = {'C', 'E', 'B', 'F', 'R', 'M', '0', '1'};

#pragma pack(push, 1)
struct FrameHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t tag;  // 0 = channel frame, 1..4 = beam line kinds
  std::uint32_t elements;
  std::uint32_t reserved;
  std::uint64_t samples;
  double fs;
  double window;
  double theta;
  char pad[8];
};
#pragma pack(pop)
static_assert(sizeof(FrameHeader) == 64, "container header must be 64 bytes");

}  // namespace

void save_frame(const std::filesystem::path& path, const ChannelFrame& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  FrameHeader h{};
  std::memcpy(h.magic, kFrameMagic, sizeof(kFrameMagic));
  h.version = 1;
  h.tag = 0;
  h.elements = static_cast<std::uint32_t>(f.elements);
  h.samples = f.samples;
  h.fs = f.fs;
  h.window = f.window;
  h.theta = 0.0;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  std::vector<float> buf(f.data.size());
  for (std::size_t i = 0; i < f.data.size(); ++i) buf[i] = static_cast<float>(f.data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw io_error("write failed: " + path.string());
}

ChannelFrame load_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  FrameHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, kFrameMagic, sizeof(kFrameMagic)) != 0)
    throw io_error(path.string() + ": not a channel frame container");
  ChannelFrame f;
  f.elements = h.elements;
  f.samples = h.samples;
  f.fs = h.fs;
  f.window = h.window;
  std::vector<float> buf(f.elements * f.samples);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw io_error(path.string() + ": truncated data section");
  f.data.assign(buf.begin(), buf.end());
  return f;
}

}  // namespace cebeam
