#include "cebeam/fdbf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "cebeam/dsp.hpp"
#include "cebeam/errors.hpp"

namespace cebeam {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t table_fingerprint(std::span<const double> offsets, double sound_speed, double theta,
                                double interval, std::size_t samples, std::int64_t band_first,
                                std::size_t band_count, int n_before, int n_after, int oversample) {
  dsp::Hasher h;
  h.add(static_cast<std::uint64_t>(offsets.size()));
  for (double o : offsets) h.add(o);
  h.add(sound_speed).add(theta).add(interval);
  h.add(static_cast<std::uint64_t>(samples));
  h.add(band_first).add(static_cast<std::uint64_t>(band_count));
  h.add(static_cast<std::int64_t>(n_before)).add(static_cast<std::int64_t>(n_after));
  h.add(static_cast<std::int64_t>(oversample));
  return h.digest();
}

// Distortion-function factors for one element on a grid of `n` points over
// [0, interval): the indicator-masked amplitude 1 + gm^2 cos^2/(t - gm sin)^2
// and the phase/k factor (2*pi/T) * gm * (gm - t sin)/(t - gm sin).
void q_env_phase(const ArrayGeometry& g, std::size_t m, double theta, double interval,
                 std::size_t n, std::vector<double>& env, std::vector<double>& phase) {
  const double gm = g.gamma(m);
  const double s = std::sin(theta);
  const double c2 = std::cos(theta) * std::cos(theta);
  if (gm != 0.0 && std::abs(gm) <= gm * s)
    throw std::invalid_argument("distortion function: pole inside support, |theta| too steep");
  const double upper = delay_curve(g, m, interval, theta);
  const double lower = std::abs(gm);
  const double dt = interval / static_cast<double>(n);
  env.assign(n, 0.0);
  phase.assign(n, 0.0);
  if (gm == 0.0) {
    // reference element: q is the plain indicator
    for (std::size_t j = 0; j < n; ++j)
      if (static_cast<double>(j) * dt < upper) env[j] = 1.0;
    return;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    if (t < lower || t >= upper) continue;
    const double den = t - gm * s;
    env[j] = 1.0 + gm * gm * c2 / (den * den);
    phase[j] = (kTwoPi / interval) * gm * (gm - t * s) / den;
  }
}

}  // namespace

std::vector<cdouble> filter_spectrum(std::span<const double> mf, std::size_t samples) {
  if (mf.empty()) throw std::invalid_argument("filter_spectrum: empty filter");
  if (mf.size() > samples)
    throw std::invalid_argument("filter_spectrum: filter longer than the frame");
  // h(t) = s*(-t) periodized into [0, T): reversed pulse wrapped around the
  // end of the buffer so that lag zero stays at sample zero.
  std::vector<double> buf(samples, 0.0);
  const std::size_t nh = mf.size();
  for (std::size_t i = 0; i < nh; ++i) buf[(samples - nh + 1 + i) % samples] = mf[i];
  return dsp::fft(std::span<const double>(buf));
}

SpectrumSet compute_channel_spectra(const ChannelFrame& f, std::span<const double> mf,
                                    double band_threshold_db, int guard) {
  if (f.elements == 0 || f.samples == 0)
    throw std::invalid_argument("compute_channel_spectra: empty frame");
  if (guard < 0) throw std::invalid_argument("compute_channel_spectra: negative guard");

  const std::size_t n = f.samples;
  SpectrumSet s;
  s.elements = f.elements;
  s.samples = n;
  s.interval = f.window;
  s.fs = f.fs;

  std::vector<std::vector<cdouble>> spectra(f.elements);
  for (std::size_t m = 0; m < f.elements; ++m) {
    spectra[m] = dsp::fft(f.row(m));
    for (auto& v : spectra[m]) v /= static_cast<double>(n);
  }

  // band of the matched-filter output, one-sided
  const auto h = filter_spectrum(mf, n);
  const std::size_t half = n / 2;
  std::vector<double> power(half + 1, 0.0);
  for (std::size_t m = 0; m < f.elements; ++m)
    for (std::size_t k = 0; k <= half; ++k) power[k] += std::norm(spectra[m][k] * h[k]);
  double peak = 0.0;
  for (double p : power) peak = std::max(peak, p);
  if (peak <= 0.0) {
    s.empty_band = true;
    return s;
  }
  const double floor = peak * std::pow(10.0, -band_threshold_db / 10.0);
  std::int64_t lo = -1, hi = -1;
  for (std::size_t k = 0; k <= half; ++k) {
    if (power[k] >= floor) {
      if (lo < 0) lo = static_cast<std::int64_t>(k);
      hi = static_cast<std::int64_t>(k);
    }
  }
  s.band_first = lo;
  s.band_count = static_cast<std::size_t>(hi - lo + 1);
  s.stored_first = std::max<std::int64_t>(0, lo - guard);
  const std::int64_t stored_last = std::min<std::int64_t>(static_cast<std::int64_t>(half), hi + guard);
  s.stored_count = static_cast<std::size_t>(stored_last - s.stored_first + 1);

  s.coeffs.resize(f.elements * s.stored_count);
  for (std::size_t m = 0; m < f.elements; ++m)
    for (std::size_t i = 0; i < s.stored_count; ++i)
      s.coeffs[m * s.stored_count + i] = spectra[m][static_cast<std::size_t>(s.stored_first) + i];
  return s;
}

BandRange band_for_window(const SpectrumSet& s, int n_before, int n_after) {
  if (s.empty_band) return {};
  const std::int64_t first = std::max<std::int64_t>(0, s.band_first - n_before);
  const std::int64_t last =
      std::min<std::int64_t>(static_cast<std::int64_t>(s.samples / 2),
                             s.band_first + static_cast<std::int64_t>(s.band_count) - 1 + n_after);
  return {first, static_cast<std::size_t>(last - first + 1)};
}

QTable build_q_table(const ArrayGeometry& g, double theta, BandRange band, int n_before,
                     int n_after, double interval, std::size_t samples, int oversample,
                     unsigned workers) {
  if (band.count == 0) throw std::invalid_argument("build_q_table: empty band");
  if (n_before < 0 || n_after < 0)
    throw std::invalid_argument("build_q_table: truncation bounds must be >= 0");
  if (oversample < 1) throw std::invalid_argument("build_q_table: oversample must be >= 1");
  if (std::abs(theta) >= std::numbers::pi / 2.0)
    throw std::invalid_argument("build_q_table: |theta| must stay below pi/2");

  QTable q;
  q.theta = theta;
  q.n_before = n_before;
  q.n_after = n_after;
  q.band_first = band.first;
  q.band_count = band.count;
  q.elements = g.size();
  q.samples = samples;
  q.interval = interval;
  q.sound_speed = g.sound_speed;
  q.oversample = oversample;
  q.offsets = g.offsets;
  q.fingerprint = table_fingerprint(g.offsets, g.sound_speed, theta, interval, samples,
                                    band.first, band.count, n_before, n_after, oversample);

  const std::size_t nq = static_cast<std::size_t>(q.window_length());
  const std::size_t ngrid = samples * static_cast<std::size_t>(oversample);
  if (nq > ngrid) throw std::invalid_argument("build_q_table: window longer than the grid");
  q.entries.resize(band.count * q.elements * nq);

  dsp::parallel_for(g.size(), workers, [&](std::size_t m) {
    std::vector<double> env, phase;
    q_env_phase(g, m, theta, interval, ngrid, env, phase);

    // phase recurrence over k: rot[j] = exp(i*k*phase[j])
    std::vector<cdouble> rot(ngrid), step(ngrid), work(ngrid);
    for (std::size_t j = 0; j < ngrid; ++j) {
      rot[j] = std::polar(1.0, static_cast<double>(band.first) * phase[j]);
      step[j] = std::polar(1.0, phase[j]);
    }
    for (std::size_t kidx = 0; kidx < band.count; ++kidx) {
      for (std::size_t j = 0; j < ngrid; ++j) work[j] = env[j] * rot[j];
      auto coeff = dsp::fft(std::span<const cdouble>(work));
      const double scale = 1.0 / static_cast<double>(ngrid);
      auto* dst = &q.entries[(kidx * q.elements + m) * nq];
      for (int nn = -n_before; nn <= n_after; ++nn) {
        const std::size_t bin =
            static_cast<std::size_t>((nn % static_cast<std::int64_t>(ngrid) +
                                      static_cast<std::int64_t>(ngrid)) %
                                     static_cast<std::int64_t>(ngrid));
        dst[nn + n_before] = static_cast<std::complex<float>>(coeff[bin] * scale);
      }
      if (kidx + 1 < band.count)
        for (std::size_t j = 0; j < ngrid; ++j) rot[j] *= step[j];
    }
  });
  return q;
}

QTable integrate_mf(QTable q, std::span<const cdouble> h_spectrum) {
  if (q.mf_integrated) throw std::invalid_argument("integrate_mf: table already integrated");
  if (h_spectrum.size() != q.samples)
    throw std::invalid_argument("integrate_mf: filter spectrum must cover all N_s bins");
  const auto n = static_cast<std::int64_t>(q.samples);
  const std::size_t nq = static_cast<std::size_t>(q.window_length());
  for (std::size_t kidx = 0; kidx < q.band_count; ++kidx) {
    const std::int64_t k = q.band_first + static_cast<std::int64_t>(kidx);
    for (std::size_t m = 0; m < q.elements; ++m) {
      auto* e = &q.entries[(kidx * q.elements + m) * nq];
      for (int nn = -q.n_before; nn <= q.n_after; ++nn) {
        const std::size_t bin = static_cast<std::size_t>(((k - nn) % n + n) % n);
        const cdouble v = static_cast<cdouble>(e[nn + q.n_before]) * h_spectrum[bin];
        e[nn + q.n_before] = static_cast<std::complex<float>>(v);
      }
    }
  }
  q.mf_integrated = true;
  return q;
}

QTable narrowed(const QTable& q, int n_before, int n_after) {
  if (n_before > q.n_before || n_after > q.n_after)
    throw std::invalid_argument("narrowed: requested window exceeds the stored one");
  QTable out = q;
  out.n_before = n_before;
  out.n_after = n_after;
  out.fingerprint = table_fingerprint(q.offsets, q.sound_speed, q.theta, q.interval, q.samples,
                                      q.band_first, q.band_count, n_before, n_after, q.oversample);
  const std::size_t nq_old = static_cast<std::size_t>(q.window_length());
  const std::size_t nq_new = static_cast<std::size_t>(out.window_length());
  out.entries.resize(q.band_count * q.elements * nq_new);
  for (std::size_t km = 0; km < q.band_count * q.elements; ++km) {
    const auto* src = &q.entries[km * nq_old];
    auto* dst = &out.entries[km * nq_new];
    for (int nn = -n_before; nn <= n_after; ++nn)
      dst[nn + n_before] = src[nn + q.n_before];
  }
  return out;
}

BeamSpectrum focus_beamform(const SpectrumSet& s, const QTable& q, MultTally* tally) {
  if (!q.mf_integrated)
    throw std::invalid_argument("focus_beamform: table lacks the matched-filter weights");
  if (s.samples != q.samples || s.elements != q.elements ||
      std::abs(s.interval - q.interval) > 1e-12 * std::max(1.0, std::abs(q.interval)))
    throw stale_lut_error("focus_beamform: table was built for a different frame layout");

  BeamSpectrum b;
  b.first = q.band_first;
  b.theta = q.theta;
  b.interval = q.interval;
  b.samples = q.samples;
  b.coeffs.assign(q.band_count, cdouble{});

  const auto n = static_cast<std::int64_t>(s.samples);
  const std::size_t nq = static_cast<std::size_t>(q.window_length());
  std::uint64_t mults = 0;
  for (std::size_t kidx = 0; kidx < q.band_count; ++kidx) {
    const std::int64_t k = q.band_first + static_cast<std::int64_t>(kidx);
    cdouble acc{};
    for (std::size_t m = 0; m < q.elements; ++m) {
      const auto* e = &q.entries[(kidx * q.elements + m) * nq];
      cdouble sum{};
      for (int nn = -q.n_before; nn <= q.n_after; ++nn) {
        // one-sided storage of a real signal's spectrum: mirror bins give
        // the conjugate, indices wrap modulo N_s
        std::int64_t kk = ((k - nn) % n + n) % n;
        cdouble c;
        if (kk <= n / 2) {
          c = s.at(m, kk);
        } else {
          c = std::conj(s.at(m, n - kk));
        }
        sum += c * static_cast<cdouble>(e[nn + q.n_before]);
      }
      acc += sum;
      mults += nq;
    }
    b.coeffs[kidx] = acc / static_cast<double>(q.elements);
  }
  if (tally) tally->multiplications += mults;
  return b;
}

BeamLine reconstruct_time(const BeamSpectrum& b, std::size_t samples) {
  if (b.coefficient_count() > samples)
    throw std::invalid_argument("reconstruct_time: more coefficients than output samples");
  const auto n = static_cast<std::int64_t>(samples);
  std::vector<cdouble> spec(samples, cdouble{});
  std::vector<char> filled(samples, 0);
  for (std::size_t i = 0; i < b.coeffs.size(); ++i) {
    const std::int64_t k = ((b.first + static_cast<std::int64_t>(i)) % n + n) % n;
    spec[static_cast<std::size_t>(k)] = b.coeffs[i];
    filled[static_cast<std::size_t>(k)] = 1;
  }
  for (std::size_t k = 0; k < samples; ++k) {
    if (!filled[k]) continue;
    const std::size_t mk = (samples - k) % samples;
    if (mk != k && !filled[mk]) spec[mk] = std::conj(spec[k]);
  }
  auto z = dsp::ifft_unscaled(spec);
  BeamLine line;
  line.theta = b.theta;
  line.kind = LineKind::focus;
  line.fs = b.interval > 0.0 ? static_cast<double>(b.samples) / b.interval : 0.0;
  line.samples.resize(samples);
  for (std::size_t j = 0; j < samples; ++j) line.samples[j] = z[j].real();
  return line;
}

BeamSpectrum beamform_spectrum_exact(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                     std::span<const double> mf, unsigned workers) {
  if (f.elements != g.size())
    throw std::invalid_argument("beamform_spectrum_exact: element count mismatch");
  const std::size_t n = f.samples;
  const std::size_t nk = n / 2 + 1;

  const auto h = filter_spectrum(mf, n);
  std::vector<std::vector<cdouble>> partial(f.elements);
  dsp::parallel_for(f.elements, workers, [&](std::size_t m) {
    // circularly matched-filtered channel
    auto spec = dsp::fft(f.row(m));
    for (std::size_t k = 0; k < n; ++k) spec[k] *= h[k];
    auto ce = dsp::ifft_unscaled(spec);
    std::vector<double> env, phase;
    q_env_phase(g, m, theta, f.window, n, env, phase);

    // out[k] = (1/N) sum_j w[j] exp(i k psi[j]), psi = phase - 2 pi j / N,
    // accumulated with a per-sample phase recurrence over k. Split
    // real/imag arrays keep the hot loop vectorizable at a fixed
    // evaluation order.
    std::vector<double> cr(n), ci(n, 0.0), sr(n), si(n);
    for (std::size_t j = 0; j < n; ++j) {
      cr[j] = ce[j].real() / static_cast<double>(n) * env[j];
      const double psi = phase[j] - kTwoPi * static_cast<double>(j) / static_cast<double>(n);
      sr[j] = std::cos(psi);
      si[j] = std::sin(psi);
    }
    auto& out = partial[m];
    out.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
      double acc_r = 0.0, acc_i = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        acc_r += cr[j];
        acc_i += ci[j];
      }
      out[k] = cdouble{acc_r, acc_i} / static_cast<double>(n);
      if (k + 1 < nk) {
        for (std::size_t j = 0; j < n; ++j) {
          const double r = cr[j] * sr[j] - ci[j] * si[j];
          ci[j] = cr[j] * si[j] + ci[j] * sr[j];
          cr[j] = r;
        }
      }
    }
  });

  BeamSpectrum b;
  b.first = 0;
  b.theta = theta;
  b.interval = f.window;
  b.samples = n;
  b.coeffs.assign(nk, cdouble{});
  for (std::size_t m = 0; m < f.elements; ++m)
    for (std::size_t k = 0; k < nk; ++k) b.coeffs[k] += partial[m][k];
  for (auto& c : b.coeffs) c /= static_cast<double>(f.elements);
  return b;
}

namespace {

constexpr char kLutMagic[8] = {'C', 'E', 'Q', 'L', 'U', 'T', '0', '1'};

#pragma pack(push, 1)
struct LutHeader {
  char magic[8];
  std::uint32_t version;
  std::uint32_t mf_integrated;
  std::uint32_t elements;
  std::uint32_t oversample;
  std::int64_t band_first;
  std::uint64_t band_count;
  std::int32_t n_before;
  std::int32_t n_after;
  std::uint64_t samples;
  double theta;
  double interval;
  double sound_speed;
  std::uint64_t fingerprint;
};
#pragma pack(pop)

}  // namespace

void save_q_table(const std::filesystem::path& path, const QTable& q) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  LutHeader h{};
  std::memcpy(h.magic, kLutMagic, sizeof(kLutMagic));
  h.version = 1;
  h.mf_integrated = q.mf_integrated ? 1 : 0;
  h.elements = static_cast<std::uint32_t>(q.elements);
  h.oversample = static_cast<std::uint32_t>(q.oversample);
  h.band_first = q.band_first;
  h.band_count = q.band_count;
  h.n_before = q.n_before;
  h.n_after = q.n_after;
  h.samples = q.samples;
  h.theta = q.theta;
  h.interval = q.interval;
  h.sound_speed = q.sound_speed;
  h.fingerprint = q.fingerprint;
  out.write(reinterpret_cast<const char*>(&h), sizeof(h));
  out.write(reinterpret_cast<const char*>(q.offsets.data()),
            static_cast<std::streamsize>(q.offsets.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(q.entries.data()),
            static_cast<std::streamsize>(q.entries.size() * sizeof(std::complex<float>)));
  if (!out) throw io_error("write failed: " + path.string());
}

QTable load_q_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  LutHeader h{};
  in.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!in || std::memcmp(h.magic, kLutMagic, sizeof(kLutMagic)) != 0 || h.version != 1)
    throw io_error(path.string() + ": not a Q-table file");
  QTable q;
  q.mf_integrated = h.mf_integrated != 0;
  q.elements = h.elements;
  q.oversample = static_cast<int>(h.oversample);
  q.band_first = h.band_first;
  q.band_count = h.band_count;
  q.n_before = h.n_before;
  q.n_after = h.n_after;
  q.samples = h.samples;
  q.theta = h.theta;
  q.interval = h.interval;
  q.sound_speed = h.sound_speed;
  q.fingerprint = h.fingerprint;
  q.offsets.resize(q.elements);
  in.read(reinterpret_cast<char*>(q.offsets.data()),
          static_cast<std::streamsize>(q.offsets.size() * sizeof(double)));
  q.entries.resize(q.band_count * q.elements * static_cast<std::size_t>(q.window_length()));
  in.read(reinterpret_cast<char*>(q.entries.data()),
          static_cast<std::streamsize>(q.entries.size() * sizeof(std::complex<float>)));
  if (!in) throw io_error(path.string() + ": truncated Q-table");
  return q;
}

}  // namespace cebeam
