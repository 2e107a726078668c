#include <CLI11.hpp>

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "cebeam/config.hpp"
#include "cebeam/errors.hpp"
#include "cebeam/experiment.hpp"
#include "cebeam/waveform.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string log_base;  // empty: keep the config file's choice
  unsigned workers = 0;
  bool rebuild_luts = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "experiment config file")->required();
  cmd->add_option("--out", f.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--workers", f.workers, "scan-line worker threads (0 = all cores)");
  cmd->add_option("--log-base", f.log_base, "log base for complexity reports")
      ->check(CLI::IsMember({"2", "e"}));
  cmd->add_flag("--rebuild-luts", f.rebuild_luts, "ignore the LUT cache and rebuild");
}

cebeam::ExperimentConfig make_config(const CommonFlags& f) {
  auto cfg = cebeam::load_config(f.config_path);
  if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
  if (f.workers > 0) cfg.workers = f.workers;
  if (f.log_base == "e") cfg.log_base = std::exp(1.0);
  else if (f.log_base == "2") cfg.log_base = 2.0;
  cfg.rebuild_luts = f.rebuild_luts;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coded-excitation ultrasound beamforming toolkit"};
  app.require_subcommand(1);

  CommonFlags run_flags, lut_flags;
  std::string wf_config, wf_out = "waveform.txt";

  auto* run = app.add_subcommand("run", "run a config-driven experiment sweep");
  add_common(run, run_flags);

  auto* luts = app.add_subcommand("build-luts", "populate the Q-table cache");
  add_common(luts, lut_flags);

  auto* wf = app.add_subcommand("export-waveform", "write the transmit pulse as two-column text");
  wf->add_option("--config", wf_config, "experiment config file")->required();
  wf->add_option("--out", wf_out, "output text file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      cebeam::run_experiment(make_config(run_flags), std::cout);
    } else if (luts->parsed()) {
      cebeam::build_luts(make_config(lut_flags), std::cout);
    } else if (wf->parsed()) {
      const auto cfg = cebeam::load_config(wf_config);
      const auto pulse =
          cebeam::make_linear_fm(cfg.f0, cfg.bandwidth_or_default(), cfg.duration_or_default(),
                                 cfg.fs_or_default(), cfg.window);
      cebeam::export_waveform(wf_out, pulse);
      std::cout << "wrote " << pulse.length() << " samples to " << wf_out << '\n';
    }
  } catch (const cebeam::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cebeam::numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const cebeam::io_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const cebeam::stale_lut_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
