#include "cebeam/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

std::vector<double> envelope(const BeamLine& line) {
  return dsp::analytic_envelope(line.samples);
}

BModeImage scan_convert(std::span<const BeamLine> lines, double dynamic_range_db,
                        double pixel_mm, double sound_speed, ScanInterp interp) {
  if (lines.size() < 2) throw std::invalid_argument("scan_convert: need at least two lines");
  for (std::size_t i = 1; i < lines.size(); ++i)
    if (!(lines[i].theta > lines[i - 1].theta))
      throw std::invalid_argument("scan_convert: theta grid must be sorted");

  const double fs = lines.front().fs;
  const std::size_t ns = lines.front().samples.size();
  std::vector<std::vector<double>> envs(lines.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    envs[i] = dsp::analytic_envelope(lines[i].samples);
    for (double v : envs[i]) peak = std::max(peak, v);
  }
  if (peak <= 0.0) throw numeric_error("scan_convert: all-zero input lines");

  const double depth_m = static_cast<double>(ns - 1) / fs * sound_speed / 2.0;
  const double th_min = lines.front().theta;
  const double th_max = lines.back().theta;
  const double half_span = std::max(std::abs(th_min), std::abs(th_max));

  BModeImage img;
  img.dynamic_range = dynamic_range_db;
  img.depth_mm = depth_m * 1e3;
  img.sector_rad = th_max - th_min;
  img.pixel_mm = pixel_mm;
  const double x_extent = depth_m * std::sin(half_span);
  img.rows = static_cast<std::size_t>(std::floor(depth_m * 1e3 / pixel_mm)) + 1;
  img.cols = 2 * static_cast<std::size_t>(std::floor(x_extent * 1e3 / pixel_mm)) + 1;
  img.db.assign(img.rows * img.cols, -dynamic_range_db);

  const std::size_t mid = img.cols / 2;
  const double dth = (th_max - th_min) / static_cast<double>(lines.size() - 1);
  for (std::size_t r = 0; r < img.rows; ++r) {
    const double z = static_cast<double>(r) * pixel_mm * 1e-3;
    for (std::size_t c = 0; c < img.cols; ++c) {
      const double x = (static_cast<double>(c) - static_cast<double>(mid)) * pixel_mm * 1e-3;
      const double rr = std::hypot(x, z);
      const double th = std::atan2(x, z);
      if (th < th_min || th > th_max || rr > depth_m) continue;
      const double si = rr * 2.0 / sound_speed * fs;      // sample index
      const double ti = (th - th_min) / dth;              // line index
      double v = 0.0;
      if (interp == ScanInterp::nearest) {
        const auto sj = static_cast<std::size_t>(std::llround(si));
        const auto tj = static_cast<std::size_t>(std::llround(ti));
        if (sj < ns && tj < envs.size()) v = envs[tj][sj];
      } else {
        const auto s0 = static_cast<std::size_t>(si);
        const auto t0 = static_cast<std::size_t>(ti);
        const double sf = si - static_cast<double>(s0);
        const double tf = ti - static_cast<double>(t0);
        const std::size_t s1 = std::min(s0 + 1, ns - 1);
        const std::size_t t1 = std::min(t0 + 1, envs.size() - 1);
        if (s0 < ns && t0 < envs.size()) {
          v = envs[t0][s0] * (1 - sf) * (1 - tf) + envs[t0][s1] * sf * (1 - tf) +
              envs[t1][s0] * (1 - sf) * tf + envs[t1][s1] * sf * tf;
        }
      }
      const double db = v > 0.0 ? 20.0 * std::log10(v / peak) : -dynamic_range_db;
      img.db[r * img.cols + c] = std::clamp(db, -dynamic_range_db, 0.0);
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const BModeImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
  std::vector<unsigned char> bytes(img.db.size());
  for (std::size_t i = 0; i < img.db.size(); ++i) {
    const double v = (img.db[i] + img.dynamic_range) / img.dynamic_range;
    bytes[i] = static_cast<unsigned char>(std::llround(std::clamp(v, 0.0, 1.0) * 255.0));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("write failed: " + path.string());
}

void write_image_csv(const std::filesystem::path& path, const BModeImage& img) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) {
      if (c) out << ',';
      out << dsp::format_double(img.at(r, c));
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace cebeam
