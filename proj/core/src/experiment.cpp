#include "cebeam/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"
#include "cebeam/fdbf.hpp"
#include "cebeam/imaging.hpp"
#include "cebeam/metrics.hpp"
#include "cebeam/scene.hpp"
#include "cebeam/tdbf.hpp"

namespace cebeam {

namespace {

struct Scene {
  CodedPulse pulse;
  ArrayGeometry geometry;
  ChannelFrame frame;
  std::vector<double> mf;
  double window = 0.0;
};

Scene prepare_scene(const ExperimentConfig& cfg) {
  Scene sc;
  sc.pulse = make_linear_fm(cfg.f0, cfg.bandwidth_or_default(), cfg.duration_or_default(),
                            cfg.fs_or_default(), cfg.window);
  sc.geometry = uniform_linear_array(cfg.elements, cfg.pitch_or_default(), cfg.sound_speed);

  double window = cfg.acquisition_window;
  if (window <= 0.0) {
    double last = 0.0;
    for (const auto& s : cfg.phantom.scatterers)
      for (std::size_t m = 0; m < sc.geometry.size(); ++m)
        last = std::max(last,
                        arrival_time(sc.geometry, m, s.range / cfg.sound_speed, s.theta));
    window = last + sc.pulse.duration + 10e-6;
  }
  sc.frame = synthesize_channels(sc.geometry, cfg.phantom, sc.pulse, cfg.fs_or_default(), window,
                                 cfg.noise_rms, cfg.seed);
  sc.window = sc.frame.window;
  sc.mf = matched_filter(sc.pulse);
  return sc;
}

void check_finite(const BeamLine& line, const std::string& what) {
  for (double v : line.samples)
    if (!std::isfinite(v)) throw numeric_error("non-finite sample in " + what);
}

std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

struct LutRequest {
  BandRange band;
  int n_before = 0;
  int n_after = 0;
};

LutRequest lut_request(const ExperimentConfig& cfg, const SpectrumSet& spectra) {
  int max_nq = 1;
  for (int nq : cfg.nq_list) max_nq = std::max(max_nq, nq);
  LutRequest r;
  if (cfg.n_before >= 0) {
    r.n_before = cfg.n_before;
    r.n_after = cfg.n_after;
  } else {
    r.n_before = (max_nq - 1) / 2;
    r.n_after = (max_nq - 1) / 2;
  }
  r.band = band_for_window(spectra, r.n_before, r.n_after);
  return r;
}

// Loads a cached raw table or builds and persists it. A cache file whose
// fingerprint matches but whose parameters differ is a hard error.
QTable obtain_q_table(const ExperimentConfig& cfg, const Scene& sc, const SpectrumSet& spectra,
                      const LutRequest& req, double theta, unsigned workers, std::ostream& log,
                      RunResult& result, bool announce) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.lut_dir_or_default();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create LUT directory " + dir.string() + ": " + ec.message());

  const std::uint64_t fp = [&] {
    dsp::Hasher h;
    h.add(static_cast<std::uint64_t>(sc.geometry.offsets.size()));
    for (double o : sc.geometry.offsets) h.add(o);
    h.add(sc.geometry.sound_speed).add(theta).add(sc.window);
    h.add(static_cast<std::uint64_t>(sc.frame.samples));
    h.add(req.band.first).add(static_cast<std::uint64_t>(req.band.count));
    h.add(static_cast<std::int64_t>(req.n_before)).add(static_cast<std::int64_t>(req.n_after));
    h.add(static_cast<std::int64_t>(cfg.q_oversample));
    return h.digest();
  }();
  const fs::path path = dir / (hex64(fp) + ".qlut");

  if (!cfg.rebuild_luts && fs::exists(path)) {
    QTable q = load_q_table(path);
    const bool same = q.fingerprint == fp && q.elements == sc.geometry.size() &&
                      q.offsets == sc.geometry.offsets &&
                      q.sound_speed == sc.geometry.sound_speed && q.theta == theta &&
                      q.interval == sc.window && q.samples == sc.frame.samples &&
                      q.band_first == req.band.first && q.band_count == req.band.count &&
                      q.n_before == req.n_before && q.n_after == req.n_after &&
                      q.oversample == cfg.q_oversample && !q.mf_integrated;
    if (!same)
      throw stale_lut_error("LUT cache entry " + path.string() +
                            " collides with different parameters");
    ++result.lut_cache_hits;
    return q;
  }

  const auto t0 = std::chrono::steady_clock::now();
  QTable q = build_q_table(sc.geometry, theta, req.band, req.n_before, req.n_after, sc.window,
                           sc.frame.samples, cfg.q_oversample, workers);
  save_q_table(path, q);
  ++result.lut_builds;
  if (announce) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    log << "built " << path.filename().string() << " (" << q.band_count << "x" << q.elements
        << "x" << q.window_length() << " entries, " << fs::file_size(path) << " bytes, "
        << dsp::format_double(ms.count()) << " ms)\n";
  }
  return q;
}

struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const std::filesystem::path& path) : out(path) {
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  }
};

std::string nan_as_empty(double v) {
  return std::isfinite(v) ? dsp::format_double(v) : std::string("");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  RunResult result;

  if (cfg.methods.empty()) {
    const std::string w = "no methods selected, nothing to do";
    result.warnings.push_back(w);
    log << "warning: " << w << '\n';
    return result;
  }
  if (cfg.thetas.empty()) throw config_error("no beam angles configured");
  if (cfg.phantom.scatterers.empty()) throw config_error("phantom has no scatterers");

  std::error_code dir_ec;
  fs::create_directories(cfg.out_dir, dir_ec);
  if (dir_ec)
    throw io_error("cannot create output directory " + cfg.out_dir.string() + ": " +
                   dir_ec.message());
  const unsigned workers =
      cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());

  Scene sc = prepare_scene(cfg);
  for (const auto& w : sc.frame.warnings) {
    result.warnings.push_back(w);
    log << "warning: " << w << '\n';
  }

  const std::uint64_t cfg_hash = dsp::Hasher{}.add(canonical_config(cfg)).digest();
  const std::string cfg_hex = hex64(cfg_hash);
  std::vector<std::pair<fs::path, std::string>> manifest;  // path, "method\tparams"

  const bool wants_focus =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::focus) != cfg.methods.end();

  SpectrumSet spectra;
  LutRequest req;
  std::vector<QTable> tables;  // raw, one per theta
  if (wants_focus) {
    int max_nq = 1;
    for (int nq : cfg.nq_list) max_nq = std::max(max_nq, nq);
    const int guard = cfg.n_before >= 0 ? cfg.n_before + cfg.n_after : max_nq - 1;
    spectra = compute_channel_spectra(sc.frame, sc.mf, cfg.band_threshold_db, guard);
    if (spectra.empty_band) throw numeric_error("channel data has an empty band");
    req = lut_request(cfg, spectra);
    tables.resize(cfg.thetas.size());
    // builds are independent per theta; cache I/O stays serialized
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i)
      tables[i] = obtain_q_table(cfg, sc, spectra, req, cfg.thetas[i], workers, log, result, false);
  }

  const double p0 = cfg.fs_or_default() / cfg.f0;

  // (method, nq) combinations; nq matters only for focus. An explicit
  // asymmetric window pins a single combination.
  std::vector<std::pair<Method, int>> combos;
  for (Method m : cfg.methods) {
    if (m == Method::focus) {
      if (cfg.n_before >= 0)
        combos.emplace_back(m, cfg.n_before + cfg.n_after + 1);
      else
        for (int nq : cfg.nq_list) combos.emplace_back(m, nq);
    } else {
      combos.emplace_back(m, 0);
    }
  }

  const auto h_spec = filter_spectrum(sc.mf, sc.frame.samples);

  std::vector<std::vector<std::string>> psf_rows;
  for (const auto& [method, nq] : combos) {
    const std::string tag =
        method_name(method) + (method == Method::focus ? "_nq" + std::to_string(nq) : "");

    std::vector<BeamLine> lines(cfg.thetas.size());
    if (method == Method::focus) {
      const int n1 = cfg.n_before >= 0 ? cfg.n_before : (nq - 1) / 2;
      const int n2 = cfg.n_before >= 0 ? cfg.n_after : (nq - 1) / 2;
      dsp::parallel_for(cfg.thetas.size(), workers, [&](std::size_t i) {
        QTable narrow = narrowed(tables[i], n1, n2);
        QTable weighted = integrate_mf(std::move(narrow), h_spec);
        auto spec = focus_beamform(spectra, weighted);
        lines[i] = reconstruct_time(spec, sc.frame.samples);
      });
    } else if (method == Method::pre) {
      dsp::parallel_for(cfg.thetas.size(), workers, [&](std::size_t i) {
        lines[i] = beamform_pre_compression(sc.frame, sc.geometry, cfg.thetas[i], sc.mf);
      });
    } else {
      dsp::parallel_for(cfg.thetas.size(), workers, [&](std::size_t i) {
        lines[i] = beamform_post_compression(sc.frame, sc.geometry, cfg.thetas[i], sc.mf);
      });
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
      check_finite(lines[i], tag + " line " + std::to_string(i));
      const fs::path p = cfg.out_dir / ("line_" + tag + "_t" + std::to_string(i) + ".bin");
      save_beam_line(p, lines[i]);
      result.outputs.push_back(p);
      manifest.emplace_back(p, method_name(method) + "\ttheta=" +
                                   dsp::format_double(cfg.thetas[i]) +
                                   (nq ? ";nq=" + std::to_string(nq) : ""));
    }

    if (lines.size() >= 2) {
      const auto img = scan_convert(lines, 60.0, 0.2, cfg.sound_speed);
      const fs::path pgm = cfg.out_dir / ("image_" + tag + ".pgm");
      const fs::path csv = cfg.out_dir / ("image_" + tag + ".csv");
      write_pgm(pgm, img);
      write_image_csv(csv, img);
      result.outputs.push_back(pgm);
      result.outputs.push_back(csv);
      manifest.emplace_back(pgm, method_name(method) + "\tdynamic_range=60" +
                                     (nq ? ";nq=" + std::to_string(nq) : ""));
      manifest.emplace_back(csv, method_name(method) + "\tdynamic_range=60" +
                                     (nq ? ";nq=" + std::to_string(nq) : ""));
    }

    // PSF rows, one per scatterer where the measurement succeeds
    for (const auto& s : cfg.phantom.scatterers) {
      std::size_t nearest = 0;
      for (std::size_t i = 1; i < cfg.thetas.size(); ++i)
        if (std::abs(cfg.thetas[i] - s.theta) < std::abs(cfg.thetas[nearest] - s.theta))
          nearest = i;
      PsfReport axial;
      bool have_axial = false;
      try {
        axial = measure_axial_psf(lines[nearest], cfg.sound_speed);
        have_axial = true;
      } catch (const measurement_error&) {
      }
      PsfReport lateral;
      bool have_lateral = false;
      if (lines.size() >= 2) {
        try {
          lateral = measure_lateral_psf(lines, s.range * 1e3, cfg.sound_speed);
          have_lateral = true;
        } catch (const measurement_error&) {
        } catch (const std::invalid_argument&) {
        }
      }
      if (!have_axial && !have_lateral) continue;
      psf_rows.push_back({method_name(method), std::to_string(nq), dsp::format_double(p0),
                          dsp::format_double(s.range * 1e3),
                          have_axial ? dsp::format_double(axial.axial_width_s * 1e6) : "",
                          have_axial ? nan_as_empty(axial.axial_width_mm) : "",
                          have_lateral ? nan_as_empty(lateral.lateral_width_rad) : "",
                          have_lateral ? nan_as_empty(lateral.lateral_width_mm) : "",
                          have_axial ? nan_as_empty(axial.peak_sidelobe_db) : ""});
    }
  }

  // one PSF report with a fixed column order across every combination
  {
    const fs::path psf_path = cfg.out_dir / "psf.csv";
    CsvWriter psf(psf_path);
    psf.row({"method", "n_q", "p", "depth_mm", "axial_width_us", "axial_width_mm",
             "lateral_width_rad", "lateral_width_mm", "peak_sidelobe_db"});
    for (const auto& row : psf_rows) psf.row(row);
    result.outputs.push_back(psf_path);
    manifest.emplace_back(psf_path, "all\tpsf");
  }

  // complexity rows are method independent
  {
    const fs::path cpath = cfg.out_dir / "complexity.csv";
    CsvWriter csv(cpath);
    csv.row({"n_q", "p", "elements", "samples", "filter_len", "band", "log_base", "nh_mode",
             "n_focus", "n_pre", "n_saved", "ratio"});
    std::vector<double> plist = cfg.p_list;
    if (plist.empty()) plist.push_back(p0);
    std::vector<int> nq_rows = cfg.nq_list;
    if (cfg.n_before >= 0) nq_rows = {cfg.n_before + cfg.n_after + 1};
    std::size_t band_bins = 0;
    if (wants_focus) {
      band_bins = spectra.band_count;
    } else {
      SpectrumSet s = compute_channel_spectra(sc.frame, sc.mf, cfg.band_threshold_db, 0);
      band_bins = s.band_count;
    }
    for (int nq : nq_rows) {
      for (double p : plist) {
        const auto ns =
            static_cast<std::size_t>(std::llround(static_cast<double>(sc.frame.samples) * p / p0));
        std::size_t nh = 0;
        if (cfg.nh_mode == FilterLenMode::measured)
          nh = static_cast<std::size_t>(std::llround(static_cast<double>(sc.mf.size()) * p / p0));
        else
          nh = static_cast<std::size_t>(std::llround(sc.pulse.time_bandwidth() * p));
        const std::size_t k = band_bins + static_cast<std::size_t>(nq) - 1;
        const auto rep = complexity_model(cfg.elements, ns, nh, k, static_cast<std::size_t>(nq),
                                          cfg.log_base);
        csv.row({std::to_string(nq), dsp::format_double(p), std::to_string(rep.elements),
                 std::to_string(rep.samples), std::to_string(rep.filter_len),
                 std::to_string(rep.band),
                 cfg.log_base == 2.0 ? "2" : "e",
                 cfg.nh_mode == FilterLenMode::measured ? "measured" : "dp",
                 dsp::format_double(rep.n_focus), dsp::format_double(rep.n_pre),
                 dsp::format_double(rep.n_saved), dsp::format_double(rep.ratio)});
      }
    }
    result.outputs.push_back(cpath);
    manifest.emplace_back(cpath, "complexity\tlog_base=" + std::string(cfg.log_base == 2.0 ? "2" : "e"));
  }

  // manifest written last, in deterministic order
  {
    const fs::path mpath = cfg.out_dir / "manifest.txt";
    std::ofstream out(mpath);
    if (!out) throw io_error("cannot open " + mpath.string() + " for writing");
    for (const auto& [p, rest] : manifest)
      out << p.filename().string() << '\t' << cfg_hex << '\t' << rest << '\n';
    if (!out) throw io_error("write failed: " + mpath.string());
    result.outputs.push_back(mpath);
  }

  log << "wrote " << result.outputs.size() << " files to " << cfg.out_dir.string() << " ("
      << result.lut_builds << " LUT builds, " << result.lut_cache_hits << " cache hits)\n";
  return result;
}

RunResult build_luts(const ExperimentConfig& cfg, std::ostream& log) {
  RunResult result;
  if (cfg.thetas.empty()) throw config_error("no beam angles configured");
  if (cfg.phantom.scatterers.empty()) throw config_error("phantom has no scatterers");

  Scene sc = prepare_scene(cfg);
  int max_nq = 1;
  for (int nq : cfg.nq_list) max_nq = std::max(max_nq, nq);
  const int guard = cfg.n_before >= 0 ? cfg.n_before + cfg.n_after : max_nq - 1;
  const auto spectra = compute_channel_spectra(sc.frame, sc.mf, cfg.band_threshold_db, guard);
  if (spectra.empty_band) throw numeric_error("channel data has an empty band");
  const auto req = lut_request(cfg, spectra);

  const unsigned workers =
      cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  for (double theta : cfg.thetas)
    obtain_q_table(cfg, sc, spectra, req, theta, workers, log, result, true);
  log << result.lut_builds << " tables built, " << result.lut_cache_hits << " cache hits\n";
  return result;
}

}  // namespace cebeam
