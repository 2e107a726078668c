#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cebeam/config.hpp"

namespace cebeam {

struct RunResult {
  std::vector<std::filesystem::path> outputs;
  std::size_t lut_builds = 0;
  std::size_t lut_cache_hits = 0;
  std::vector<std::string> warnings;
};

/// Execute a full config-driven sweep: synthesize the scene once, beamform
/// every (method, N_q, theta) combination, and emit beam lines, PSF and
/// complexity CSVs, sector images and a manifest into cfg.out_dir. Q-tables
/// are persisted in the LUT cache and reused when their fingerprints match.
RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// Populate the LUT cache for every theta in the config without producing
/// imaging outputs. Prints per-table build time and file size.
RunResult build_luts(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace cebeam
