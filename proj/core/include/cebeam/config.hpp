#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cebeam/scene.hpp"
#include "cebeam/waveform.hpp"

namespace cebeam {

enum class Method { pre, post, focus };

enum class FilterLenMode { measured, oversampling_product };

/// A full experiment description, parsed from a flat `key = value` file.
/// See load_config() for the key list and defaults.
struct ExperimentConfig {
  // pulse
  double f0 = 3.0e6;
  double bandwidth = 0.0;     // default 0.6 * f0
  double duration = 0.0;      // default time_bandwidth / bandwidth
  double time_bandwidth = 60.0;
  WindowSpec window;

  // sampling / scene
  double fs = 0.0;  // default 4 * f0
  double acquisition_window = 0.0;  // default: max round trip + Tp + 10 us
  std::size_t elements = 64;
  double pitch = 0.0;  // default lambda/2 = c / f0 / 2
  double sound_speed = 1540.0;
  Phantom phantom;
  std::filesystem::path phantom_file;  // empty when scatterers are inline

  // scan
  std::vector<double> thetas;
  std::vector<Method> methods;
  std::vector<int> nq_list = {3, 9, 15, 21, 29};
  std::vector<double> p_list;  // oversampling factors for complexity rows
  int n_before = -1;           // -1: symmetric (N_q-1)/2
  int n_after = -1;

  // frequency-domain settings
  double band_threshold_db = 40.0;
  int q_oversample = 1;

  // noise / reproducibility
  double noise_rms = 0.0;
  std::uint64_t seed = 0;

  // reporting
  double log_base = 2.0;
  FilterLenMode nh_mode = FilterLenMode::measured;

  // execution
  std::filesystem::path out_dir = "out";
  std::filesystem::path lut_dir;  // default: out_dir / "luts"
  unsigned workers = 0;           // 0: hardware concurrency
  bool rebuild_luts = false;

  double bandwidth_or_default() const { return bandwidth > 0.0 ? bandwidth : 0.6 * f0; }
  double duration_or_default() const {
    return duration > 0.0 ? duration : time_bandwidth / bandwidth_or_default();
  }
  double fs_or_default() const { return fs > 0.0 ? fs : 4.0 * f0; }
  double pitch_or_default() const {
    return pitch > 0.0 ? pitch : sound_speed / f0 / 2.0;
  }
  std::filesystem::path lut_dir_or_default() const {
    return lut_dir.empty() ? out_dir / "luts" : lut_dir;
  }
};

/// Parse and validate a config file. Unknown keys, malformed values,
/// missing referenced files and even-N_q symmetric windows are
/// config_errors.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parse from an already-loaded string (file name only for messages).
ExperimentConfig parse_config(const std::string& text, const std::string& name = "<config>");

/// Canonical serialization used for the run's config hash.
std::string canonical_config(const ExperimentConfig& cfg);

std::string method_name(Method m);

}  // namespace cebeam
