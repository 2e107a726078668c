#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "cebeam/tdbf.hpp"

namespace cebeam {

/// Magnitude of the analytic signal of a scan line.
std::vector<double> envelope(const BeamLine& line);

enum class ScanInterp { bilinear, nearest };

/// Sector image on a cartesian grid; pixel values are dB re the image peak,
/// clipped to [-dynamic_range, 0]; pixels outside the sector sit at the
/// clip floor.
struct BModeImage {
  std::size_t rows = 0;  // z (depth)
  std::size_t cols = 0;  // x (lateral)
  std::vector<double> db;
  double dynamic_range = 60.0;
  double depth_mm = 0.0;
  double sector_rad = 0.0;  // total opening angle
  double pixel_mm = 0.0;

  double at(std::size_t r, std::size_t c) const { return db[r * cols + c]; }
};

/// Envelope-detect, log-compress and scan-convert a sorted theta fan.
BModeImage scan_convert(std::span<const BeamLine> lines, double dynamic_range_db,
                        double pixel_mm, double sound_speed,
                        ScanInterp interp = ScanInterp::bilinear);

/// 8-bit binary PGM (P5), dB mapped linearly from [-DR, 0] to [0, 255].
void write_pgm(const std::filesystem::path& path, const BModeImage& img);

/// Raw dB pixels, one CSV row per image row.
void write_image_csv(const std::filesystem::path& path, const BModeImage& img);

}  // namespace cebeam
