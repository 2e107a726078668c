#include "cebeam/tdbf.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

double beam_window_end(const ArrayGeometry& g, double window, double theta) {
  double tb = delay_curve_inverse(g, 0, window, theta);
  for (std::size_t m = 1; m < g.size(); ++m)
    tb = std::min(tb, delay_curve_inverse(g, m, window, theta));
  return tb;
}

namespace {

// Realigned matched filtering: full convolution with the filter, dropping
// the first Nh-1 samples so lag zero maps to delay zero.
std::vector<double> compress(std::span<const double> channel, std::span<const double> mf) {
  auto conv = dsp::convolve_full(channel, mf);
  const std::size_t nh = mf.size();
  return {conv.begin() + static_cast<std::ptrdiff_t>(nh - 1),
          conv.begin() + static_cast<std::ptrdiff_t>(nh - 1 + channel.size())};
}

BeamLine beamform_rows(const std::vector<std::vector<double>>& rows, const ArrayGeometry& g,
                       double theta, double fs, double window, MultTally* tally) {
  const std::size_t n = rows.front().size();
  const std::size_t count = g.size();
  BeamLine line;
  line.theta = theta;
  line.fs = fs;
  line.samples.assign(n, 0.0);

  const double tb = beam_window_end(g, window, theta);
  const auto valid = std::min<std::size_t>(
      n, static_cast<std::size_t>(std::max(0.0, std::ceil(tb * fs))));
  std::uint64_t interp_count = 0;
  for (std::size_t m = 0; m < count; ++m) {
    std::span<const double> row = rows[m];
    for (std::size_t i = 0; i < valid; ++i) {
      const double x = delay_curve(g, m, static_cast<double>(i) / fs, theta) * fs;
      line.samples[i] += dsp::sample_linear(row, x);
    }
    interp_count += valid;
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < valid; ++i) line.samples[i] *= inv;
  if (tally) tally->multiplications += interp_count;
  return line;
}

std::uint64_t fft_conv_mults(std::size_t ns, std::size_t nh) {
  // three transforms of length L plus the spectral product
  const double len = static_cast<double>(ns + nh - 1);
  return static_cast<std::uint64_t>(1.5 * len * std::log2(len) + len);
}

}  // namespace

BeamLine beamform_time(const ChannelFrame& f, const ArrayGeometry& g, double theta) {
  if (f.elements != g.size())
    throw std::invalid_argument("beamform_time: frame/geometry element count mismatch");
  std::vector<std::vector<double>> rows(f.elements);
  for (std::size_t m = 0; m < f.elements; ++m)
    rows[m].assign(f.row(m).begin(), f.row(m).end());
  auto line = beamform_rows(rows, g, theta, f.fs, f.window, nullptr);
  line.kind = LineKind::uncoded;
  return line;
}

BeamLine beamform_pre_compression(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                  std::span<const double> mf, MultTally* tally) {
  if (f.elements != g.size())
    throw std::invalid_argument("beamform_pre_compression: frame/geometry element count mismatch");
  std::vector<std::vector<double>> rows(f.elements);
  for (std::size_t m = 0; m < f.elements; ++m) rows[m] = compress(f.row(m), mf);
  if (tally)
    tally->multiplications += f.elements * fft_conv_mults(f.samples, mf.size());
  auto line = beamform_rows(rows, g, theta, f.fs, f.window, tally);
  line.kind = LineKind::pre_compression;
  return line;
}

BeamLine beamform_post_compression(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                   std::span<const double> mf) {
  auto line = beamform_time(f, g, theta);
  line.samples = compress(line.samples, mf);
  line.kind = LineKind::post_compression;
  return line;
}

namespace {

constexpr char kFrameMagic[8] = {'C', 'E', 'B', 'F', 'R', 'M', '0', '1'};

#pragma pack(push, 1)
struct LineHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t tag;
  std::uint32_t elements;
  std::uint32_t reserved;
  std::uint64_t samples;
  double fs;
  double window;
  double theta;
  char pad[8];
};
#pragma pack(pop)
static_assert(sizeof(LineHeader) == 64);

}  // namespace

void save_beam_line(const std::filesystem::path& path, const BeamLine& line) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  LineHeader h{};
  std::memcpy(h.magic, kFrameMagic, sizeof(kFrameMagic));
  h.version = 1;
  h.tag = static_cast<std::uint32_t>(line.kind);
  h.elements = 1;
  h.samples = line.samples.size();
  h.fs = line.fs;
  h.window = line.fs > 0.0 ? static_cast<double>(line.samples.size()) / line.fs : 0.0;
  h.theta = line.theta;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  std::vector<float> buf(line.samples.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(line.samples[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw io_error("write failed: " + path.string());
}

BeamLine load_beam_line(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  LineHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, kFrameMagic, sizeof(kFrameMagic)) != 0 || h.elements != 1 ||
      h.tag < 1 || h.tag > 4)
    throw io_error(path.string() + ": not a beam line container");
  BeamLine line;
  line.kind = static_cast<LineKind>(h.tag);
  line.fs = h.fs;
  line.theta = h.theta;
  std::vector<float> buf(h.samples);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!in) throw io_error(path.string() + ": truncated data section");
  line.samples.assign(buf.begin(), buf.end());
  return line;
}

}  // namespace cebeam
