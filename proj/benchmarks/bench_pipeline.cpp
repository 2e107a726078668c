#include <benchmark/benchmark.h>

#include "cebeam/dsp.hpp"
#include "cebeam/fdbf.hpp"
#include "cebeam/imaging.hpp"
#include "cebeam/metrics.hpp"
#include "cebeam/scene.hpp"
#include "cebeam/tdbf.hpp"

using namespace cebeam;

namespace {

struct Fixture {
  CodedPulse pulse;
  ArrayGeometry geometry;
  ChannelFrame frame;
  std::vector<double> mf;
  SpectrumSet spectra;
  QTable table;  // mf-integrated, N_q = 29

  Fixture() {
    const double f0 = 3.0e6, B = 1.8e6, fs = 4 * f0;
    pulse = make_linear_fm(f0, B, 60.0 / B, fs, {});
    geometry = uniform_linear_array(64, 1540.0 / f0 / 2.0, 1540.0);
    Phantom ph{{{15e-3, 0.0, 1.0, 0.0}, {30e-3, 0.05, 0.7, 0.0}}};
    frame = synthesize_channels(geometry, ph, pulse, fs,
                                2 * 30e-3 / 1540.0 + pulse.duration + 10e-6);
    mf = matched_filter(pulse);
    spectra = compute_channel_spectra(frame, mf, 40.0, 28);
    auto raw = build_q_table(geometry, 0.0, band_for_window(spectra, 14, 14), 14, 14,
                             frame.window, frame.samples);
    table = integrate_mf(std::move(raw), filter_spectrum(mf, frame.samples));
  }
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

void BM_MakeLinearFm(benchmark::State& state) {
  for (auto _ : state) {
    auto p = make_linear_fm(3.0e6, 1.8e6, 60.0 / 1.8e6, 12.0e6, {});
    benchmark::DoNotOptimize(p.samples.data());
  }
}
BENCHMARK(BM_MakeLinearFm);

void BM_Autocorrelation(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto r = autocorrelation(f.pulse);
    benchmark::DoNotOptimize(r.values.data());
  }
}
BENCHMARK(BM_Autocorrelation);

void BM_SynthesizeChannels(benchmark::State& state) {
  auto& f = fixture();
  Phantom ph{{{15e-3, 0.0, 1.0, 0.0}, {30e-3, 0.05, 0.7, 0.0}}};
  for (auto _ : state) {
    auto frame = synthesize_channels(f.geometry, ph, f.pulse, f.frame.fs, f.frame.window);
    benchmark::DoNotOptimize(frame.data.data());
  }
}
BENCHMARK(BM_SynthesizeChannels);

void BM_BeamformTime(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto line = beamform_time(f.frame, f.geometry, 0.1);
    benchmark::DoNotOptimize(line.samples.data());
  }
}
BENCHMARK(BM_BeamformTime);

void BM_BeamformPreCompression(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto line = beamform_pre_compression(f.frame, f.geometry, 0.1, f.mf);
    benchmark::DoNotOptimize(line.samples.data());
  }
}
BENCHMARK(BM_BeamformPreCompression);

void BM_ChannelSpectra(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto s = compute_channel_spectra(f.frame, f.mf, 40.0, 28);
    benchmark::DoNotOptimize(s.coeffs.data());
  }
}
BENCHMARK(BM_ChannelSpectra);

void BM_BuildQTable(benchmark::State& state) {
  auto& f = fixture();
  const auto band = band_for_window(f.spectra, 14, 14);
  for (auto _ : state) {
    auto q = build_q_table(f.geometry, 0.1, band, 14, 14, f.frame.window, f.frame.samples);
    benchmark::DoNotOptimize(q.entries.data());
  }
}
BENCHMARK(BM_BuildQTable)->Unit(benchmark::kMillisecond);

void BM_FocusBeamform(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) {
    auto beam = focus_beamform(f.spectra, f.table);
    auto line = reconstruct_time(beam, f.frame.samples);
    benchmark::DoNotOptimize(line.samples.data());
  }
}
BENCHMARK(BM_FocusBeamform);

void BM_ScanConvert(benchmark::State& state) {
  auto& f = fixture();
  std::vector<BeamLine> lines;
  for (int i = -8; i <= 8; ++i)
    lines.push_back(beamform_pre_compression(f.frame, f.geometry, 0.02 * i, f.mf));
  for (auto _ : state) {
    auto img = scan_convert(lines, 60.0, 0.25, 1540.0);
    benchmark::DoNotOptimize(img.db.data());
  }
}
BENCHMARK(BM_ScanConvert)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
