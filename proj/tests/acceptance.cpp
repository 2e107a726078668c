// Acceptance suite: one check per shipped criterion, each printing a PASS or
// FAIL line with the measured numbers. Run with a criterion index (1-8) or
// no argument for the full sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cebeam/dsp.hpp"
#include "cebeam/experiment.hpp"
#include "cebeam/fdbf.hpp"
#include "cebeam/imaging.hpp"
#include "cebeam/metrics.hpp"
#include "cebeam/scene.hpp"
#include "cebeam/tdbf.hpp"
#include "cebeam/waveform.hpp"
#include "measure.hpp"
#include "oracles.hpp"

using namespace cebeam;
namespace fs = std::filesystem;

namespace {

constexpr double kSoundSpeed = 1540.0;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& what) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << what << '\n';
  if (!pass) ++g_failures;
}

unsigned hw_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Scene {
  CodedPulse pulse;
  ArrayGeometry geometry;
  ChannelFrame frame;
  std::vector<double> mf;
};

Scene make_scene(std::size_t elements, double f0, double bandwidth, double duration,
                 double fs, std::vector<Scatterer> scats, double taper, double margin = 10e-6) {
  Scene s;
  s.pulse = make_linear_fm(f0, bandwidth, duration, fs, {Window::tapered_cosine, taper});
  s.geometry = uniform_linear_array(elements, kSoundSpeed / f0 / 2.0, kSoundSpeed);
  double last = 0.0;
  for (const auto& sc : scats)
    for (std::size_t m = 0; m < elements; ++m)
      last = std::max(last, arrival_time(s.geometry, m, sc.range / kSoundSpeed, sc.theta));
  s.frame = synthesize_channels(s.geometry, Phantom{std::move(scats)}, s.pulse, fs,
                                last + duration + margin);
  s.mf = matched_filter(s.pulse);
  return s;
}

double envelope_width(std::span<const double> samples, double dx) {
  const auto env = dsp::analytic_envelope(samples);
  return half_power_width(env, dx);
}

// --- criterion 1: full-band untruncated equivalence with the time oracle ---

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  const double f0 = 2.0e6, B = 1.2e6, Tp = 10e-6, fs = 72 * f0;
  auto s = make_scene(64, f0, B, Tp, fs,
                      {{10e-3, 0.0, 1.0, 0.0},
                       {25e-3, 0.03, 0.8, 0.0},
                       {40e-3, -0.02, 1.2, 0.0},
                       {60e-3, 0.05, 0.6, 0.0},
                       {80e-3, -0.04, 1.0, 0.0}},
                      0.1, 8e-6);

  double worst = 0.0;
  for (double theta : {0.0, 0.03}) {
    const auto oracle_line = beamform_pre_compression(s.frame, s.geometry, theta, s.mf);
    const auto spec = beamform_spectrum_exact(s.frame, s.geometry, theta, s.mf, hw_workers());
    const auto line = reconstruct_time(spec, s.frame.samples);
    const auto tb = beam_window_end(s.geometry, s.frame.window, theta);
    const auto nb = static_cast<std::size_t>(tb * s.frame.fs) - 2;
    worst = std::max(worst, oracle::nrmse(std::span(line.samples).subspan(0, nb),
                                          std::span(oracle_line.samples).subspan(0, nb)));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream what;
  what << "full-band untruncated reconstruction vs time-domain pre-compression: worst NRMSE "
       << dsp::format_double(worst) << " (< 1e-3), runtime " << dsp::format_double(secs)
       << " s (< 60)";
  report(1, worst < 1e-3 && secs < 60.0, what.str());
}

// --- criterion 2: axial invariance under window truncation ---

void criterion_2() {
  const double f0 = 3.0e6, B = 2.5e6, Tp = 60.0 / B, fs = 4 * f0;
  auto s = make_scene(64, f0, B, Tp, fs, {{10e-3, 0.0, 1.0, 0.0}}, 0.2);

  const auto pre = beamform_pre_compression(s.frame, s.geometry, 0.0, s.mf);
  const auto pre_env = dsp::analytic_envelope(pre.samples);
  const double w_pre = half_power_width(pre_env, 1.0 / fs);
  const double sl_pre = peak_sidelobe_db(pre_env);

  const auto spectra = compute_channel_spectra(s.frame, s.mf, 40.0, 28);
  const auto h = filter_spectrum(s.mf, s.frame.samples);
  const auto base = build_q_table(s.geometry, 0.0, band_for_window(spectra, 14, 14), 14, 14,
                                  s.frame.window, s.frame.samples, 1, hw_workers());

  const auto line_for = [&](int nq) {
    const int half = (nq - 1) / 2;
    const auto qt = integrate_mf(narrowed(base, half, half), h);
    return reconstruct_time(focus_beamform(spectra, qt), s.frame.samples);
  };

  const auto l9 = line_for(9);
  const double w9 = envelope_width(l9.samples, 1.0 / fs);
  const auto l3 = line_for(3);
  const auto env3 = dsp::analytic_envelope(l3.samples);
  const double sl3 = peak_sidelobe_db(env3);

  const double width_gap_samples = std::abs(w9 - w_pre) * fs;
  const double penalty = sl3 - sl_pre;
  std::ostringstream what;
  what << "axial width at N_q=9 within one sample of the oracle (gap "
       << dsp::format_double(width_gap_samples) << " samples); N_q=3 sidelobe penalty "
       << dsp::format_double(penalty) << " dB (<= 2)";
  report(2, width_gap_samples <= 1.0 && penalty <= 2.0, what.str());
}

// --- criterion 3: post-compression degradation trend over depth ---

void criterion_3() {
  const double f0 = 3.0e6, B = 2.5e6, Tp = 60.0 / B, fs = 4 * f0;
  const double theta_s = 0.2;
  const double depths_mm[] = {10.0, 16.0, 20.0, 25.0, 40.0, 80.0};

  std::vector<double> width_ratio, sidelobe_gap;
  for (double d : depths_mm) {
    auto s = make_scene(32, f0, B, Tp, fs, {{d * 1e-3, theta_s, 1.0, 0.0}}, 0.2);
    const auto pre = beamform_pre_compression(s.frame, s.geometry, theta_s, s.mf);
    const auto post = beamform_post_compression(s.frame, s.geometry, theta_s, s.mf);
    const auto env_pre = dsp::analytic_envelope(pre.samples);
    const auto env_post = dsp::analytic_envelope(post.samples);
    width_ratio.push_back(half_power_width(env_post, 1.0) / half_power_width(env_pre, 1.0));
    sidelobe_gap.push_back(peak_sidelobe_db(env_post) - peak_sidelobe_db(env_pre));
  }

  const bool near_field_ok = width_ratio[0] >= 1.05 && sidelobe_gap[0] >= 3.0;
  bool monotone = true;
  for (std::size_t i = 1; i < width_ratio.size(); ++i)
    monotone = monotone && (width_ratio[i] <= width_ratio[i - 1] + 0.005);

  std::ostringstream what;
  what << "10 mm: post/pre width ratio " << dsp::format_double(width_ratio[0])
       << " (>= 1.05), sidelobe gap " << dsp::format_double(sidelobe_gap[0])
       << " dB (>= 3); width gap over 10-80 mm [";
  for (std::size_t i = 0; i < width_ratio.size(); ++i)
    what << (i ? " " : "") << dsp::format_double(width_ratio[i] - 1.0);
  what << "] monotone " << (monotone ? "yes" : "no");
  report(3, near_field_ok && monotone, what.str());
}

// --- criterion 4: lateral convergence with the window length ---

void criterion_4() {
  // a 32-element aperture keeps the N_q=29 window truncation error below
  // the lateral measurement scale
  const double f0 = 3.0e6, B = 1.8e6, Tp = 60.0 / B, fs = 4 * f0;
  const double depth = 10e-3;
  auto s = make_scene(32, f0, B, Tp, fs, {{depth, 0.0, 1.0, 0.0}}, 0.1);

  std::vector<double> thetas;
  for (int i = -20; i <= 20; ++i) thetas.push_back(0.005 * i);

  std::vector<BeamLine> pre_lines;
  for (double th : thetas)
    pre_lines.push_back(beamform_pre_compression(s.frame, s.geometry, th, s.mf));
  const double w_pre = measure_lateral_psf(pre_lines, depth * 1e3, kSoundSpeed).lateral_width_rad;

  const auto spectra = compute_channel_spectra(s.frame, s.mf, 40.0, 28);
  const auto h = filter_spectrum(s.mf, s.frame.samples);
  std::vector<QTable> bases(thetas.size());
  dsp::parallel_for(thetas.size(), hw_workers(), [&](std::size_t i) {
    bases[i] = build_q_table(s.geometry, thetas[i], band_for_window(spectra, 14, 14), 14, 14,
                             s.frame.window, s.frame.samples);
  });

  std::vector<double> widths;
  for (int nq : {3, 9, 15, 21, 29}) {
    const int half = (nq - 1) / 2;
    std::vector<BeamLine> lines(thetas.size());
    dsp::parallel_for(thetas.size(), hw_workers(), [&](std::size_t i) {
      const auto qt = integrate_mf(narrowed(bases[i], half, half), h);
      lines[i] = reconstruct_time(focus_beamform(spectra, qt), s.frame.samples);
      lines[i].theta = thetas[i];
    });
    widths.push_back(measure_lateral_psf(lines, depth * 1e3, kSoundSpeed).lateral_width_rad);
  }

  bool monotone = true;
  for (std::size_t i = 1; i < widths.size(); ++i)
    monotone = monotone && (widths[i] <= widths[i - 1] * (1.0 + 1e-3));
  const double final_gap = std::abs(widths.back() - w_pre) / w_pre;

  std::ostringstream what;
  what << "lateral widths over N_q {3,9,15,21,29}: [";
  for (std::size_t i = 0; i < widths.size(); ++i)
    what << (i ? " " : "") << dsp::format_double(widths[i]);
  what << "] rad, non-increasing " << (monotone ? "yes" : "no") << "; N_q=29 vs oracle "
       << dsp::format_double(final_gap * 100.0) << "% (<= 5%)";
  report(4, monotone && final_gap <= 0.05, what.str());
}

// --- criterion 5: closed-form complexity ratios ---

void criterion_5() {
  struct Case {
    std::size_t ns, nh, nq;
    double expect, tol;
  };
  const Case cases[] = {
      {1392, 274, 29, 4.0, 0.6},
      {1392, 274, 3, 33.0, 5.0},
      {3480, 600, 29, 11.0, 1.7},
      {3480, 600, 3, 77.0, 12.0},
  };
  bool ok = true;
  std::ostringstream what;
  what << "ratios (log2):";
  for (const auto& c : cases) {
    const auto r = complexity_model(64, c.ns, c.nh, 260, c.nq, 2.0);
    ok = ok && std::abs(r.ratio - c.expect) <= c.tol;
    what << " N_q=" << c.nq << ",P=" << (c.ns == 1392 ? 4 : 10) << ": "
         << dsp::format_double(r.ratio) << " (want " << c.expect << "+-" << c.tol << ")";
  }
  report(5, ok, what.str());
}

// --- criterion 6: Q-coefficient energy concentration ---

void criterion_6() {
  // Table I scale: f_s = 4 f_c, N_s = 1392, theta = 0.427 rad, K = 260 bins
  // centred on the carrier; N_h = 274 fixes the matched filter.
  const double fc = 2.9e6, fs = 4 * fc, f0 = 3.0e6;
  const std::size_t ns = 1392;
  const double interval = static_cast<double>(ns) / fs;
  const double tp = 274.0 / fs;
  const double bw = 60.0 / tp;  // D = 60 with N_h = 274 samples
  const auto pulse = make_linear_fm(f0, bw, tp, fs, {Window::tapered_cosine, 0.2});
  const auto mf = matched_filter(pulse);
  const auto h = filter_spectrum(mf, ns);
  const auto g = uniform_linear_array(64, kSoundSpeed / f0 / 2.0, kSoundSpeed);
  const double theta = 0.427;

  const std::int64_t band_first = static_cast<std::int64_t>(std::llround(f0 * interval)) - 130;
  const std::size_t band_count = 260;

  double worst_q = 1.0, worst_qt = 1.0, mean_q = 0.0, mean_qt = 0.0;
  bool peaks_inside = true;
  const int n1 = static_cast<int>(ns) / 2 - 1, n2 = static_cast<int>(ns) / 2;
  const std::size_t chunk = 8;
  std::size_t count = 0;
  for (std::size_t k0 = 0; k0 < band_count; k0 += chunk) {
    const std::size_t nk = std::min(chunk, band_count - k0);
    const auto q = build_q_table(g, theta, {band_first + static_cast<std::int64_t>(k0), nk}, n1,
                                 n2, interval, ns, 1, hw_workers());
    for (std::size_t kidx = 0; kidx < nk; ++kidx) {
      const std::int64_t k = q.band_first + static_cast<std::int64_t>(kidx);
      for (std::size_t m = 0; m < q.elements; ++m) {
        double tot_q = 0.0, in_q = 0.0, tot_qt = 0.0, in_qt = 0.0, peak = 0.0;
        int peak_n = 0;
        for (int n = -n1; n <= n2; ++n) {
          const double vq = std::norm(static_cast<cdouble>(q.entry(kidx, m, n)));
          const auto hidx = static_cast<std::size_t>(
              (((k - n) % static_cast<std::int64_t>(ns)) + static_cast<std::int64_t>(ns)) %
              static_cast<std::int64_t>(ns));
          const double vqt = vq * std::norm(h[hidx]);
          tot_q += vq;
          tot_qt += vqt;
          if (std::abs(n) <= 14) {
            in_q += vq;
            in_qt += vqt;
          }
          if (vqt > peak) {
            peak = vqt;
            peak_n = n;
          }
        }
        const double fq = in_q / tot_q;
        const double fqt = in_qt / tot_qt;
        worst_q = std::min(worst_q, fq);
        worst_qt = std::min(worst_qt, fqt);
        mean_q += fq;
        mean_qt += fqt;
        peaks_inside = peaks_inside && std::abs(peak_n) <= 14;
        ++count;
      }
    }
  }
  mean_q /= static_cast<double>(count);
  mean_qt /= static_cast<double>(count);

  std::ostringstream what;
  what << "energy inside the N_q=29 window over all (k,m): Q min "
       << dsp::format_double(worst_q) << " mean " << dsp::format_double(mean_q) << "; Q~ min "
       << dsp::format_double(worst_qt) << " mean " << dsp::format_double(mean_qt)
       << " (>= 0.99 required); |Q~| peak index inside window: "
       << (peaks_inside ? "yes" : "no")
       << ". Note: the distortion function sweeps past +-14 bins near its lower support"
          " edge for off-center elements, so a 99% bound cannot hold for every (k,m) at"
          " this aperture; per-coefficient amplitudes do decay by orders of magnitude"
          " and the peak always stays inside the window.";
  report(6, worst_q >= 0.99 && worst_qt >= 0.99, what.str());
}

// --- criterion 7: waveform suite ---

void criterion_7() {
  const double f0 = 3.0e6, B = 1.8e6, fs = 4 * f0;
  bool ok = true;
  std::ostringstream what;

  what << "autocorr width x B:";
  for (double d : {20.0, 60.0, 100.0}) {
    const auto p = make_linear_fm(f0, B, d / B, fs, {});
    const auto r = autocorrelation(p);
    const double w = envelope_width(r.values, 1.0 / fs);
    const double rel = std::abs(w - 1.0 / B) * B;
    ok = ok && rel < 0.25;
    what << ' ' << dsp::format_double(w * B);
  }

  const auto p60 = make_linear_fm(f0, B, 60.0 / B, fs, {});
  std::vector<double> shifts;
  for (int i = -4; i <= 4; ++i) shifts.push_back(B / 4.0 * i / 4.0);
  const auto map = ambiguity(p60, shifts);
  std::vector<double> widths;
  for (const auto& row : map.values) {
    const auto env = measure::rectified_envelope(row, fs, f0);
    widths.push_back(half_power_width(env, 1.0 / fs));
  }
  const double mean = std::accumulate(widths.begin(), widths.end(), 0.0) /
                      static_cast<double>(widths.size());
  double dev = 0.0;
  for (double w : widths) dev = std::max(dev, std::abs(w - mean) / mean);
  ok = ok && dev < 0.20;
  what << "; ambiguity width max deviation from mean " << dsp::format_double(dev * 100.0) << "%";

  const auto fast = autocorrelation(p60);
  const auto ref = oracle::lag_sum(p60.samples, p60.samples, fs);
  double peak = 0.0, worst = 0.0;
  for (double v : ref) peak = std::max(peak, std::abs(v));
  for (std::size_t i = 0; i < ref.size(); ++i)
    worst = std::max(worst, std::abs(fast.values[i] - ref[i]) / peak);
  ok = ok && worst < 1e-8;
  what << "; fft vs direct lag-sum " << dsp::format_double(worst);

  report(7, ok, what.str());
}

// --- criterion 8: determinism across runs and worker counts ---

void criterion_8() {
  const auto root = fs::temp_directory_path() / "cebeam_acceptance_c8";
  fs::remove_all(root);

  const auto config_for = [&](const fs::path& out, unsigned workers) {
    std::ostringstream ss;
    ss << "pulse.f0_hz = 3e6\npulse.bandwidth_hz = 1.8e6\npulse.duration_s = 11.1e-6\n"
       << "array.elements = 8\nscatterer = 0.012 0.0 1.0 0\nscatterer = 0.02 0.05 0.7 0\n"
       << "beam.theta_min_rad = -0.08\nbeam.theta_max_rad = 0.08\nbeam.theta_count = 3\n"
       << "run.methods = pre, post, focus\nrun.nq_list = 3, 9\nnoise.rms = 0.002\n"
       << "noise.seed = 5\nrun.workers = " << workers << "\noutput.dir = " << out.string()
       << "\n";
    return parse_config(ss.str());
  };

  std::ostringstream log;
  run_experiment(config_for(root / "a", 1), log);
  run_experiment(config_for(root / "b", 2), log);

  bool identical = true;
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    if (entry.is_directory()) continue;
    const auto name = entry.path().filename();
    std::ifstream fa(entry.path(), std::ios::binary), fb(root / "b" / name, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    identical = identical && fb.good() && sa.str() == sb.str();
    ++compared;
  }

  // rebuilt LUTs must be bit identical
  std::vector<std::pair<fs::path, std::string>> luts;
  for (const auto& e : fs::directory_iterator(root / "a" / "luts")) {
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    luts.emplace_back(e.path(), ss.str());
  }
  auto forced = config_for(root / "a", 2);
  forced.rebuild_luts = true;
  run_experiment(forced, log);
  bool luts_identical = true;
  for (const auto& [p, before] : luts) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    luts_identical = luts_identical && ss.str() == before;
  }

  std::ostringstream what;
  what << compared << " outputs byte-identical across worker counts: "
       << (identical ? "yes" : "no") << "; rebuilt LUTs bit-identical: "
       << (luts_identical ? "yes" : "no");
  report(8, identical && luts_identical && compared > 10, what.str());
  fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
  void (*criteria[])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                          criterion_5, criterion_6, criterion_7, criterion_8};
  if (argc > 1) {
    const int idx = std::atoi(argv[1]);
    if (idx < 1 || idx > 8) {
      std::cerr << "usage: " << argv[0] << " [1-8]\n";
      return 64;
    }
    criteria[idx - 1]();
  } else {
    for (auto* fn : criteria) fn();
  }
  return g_failures == 0 ? 0 : 1;
}
