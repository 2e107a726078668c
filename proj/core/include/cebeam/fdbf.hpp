#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cebeam/scene.hpp"
#include "cebeam/tdbf.hpp"

namespace cebeam {

using cdouble = std::complex<double>;

/// Fourier-series coefficients c_m[k] of each channel over [0, T), stored
/// for a contiguous positive-frequency hull around the matched-filter
/// output band plus the guard bins a truncated convolution window reads.
struct SpectrumSet {
  std::vector<cdouble> coeffs;  // elements x stored_count, row-major
  std::size_t elements = 0;
  std::int64_t stored_first = 0;  // first stored coefficient index
  std::size_t stored_count = 0;
  std::int64_t band_first = 0;  // matched-filter band hull (G bins)
  std::size_t band_count = 0;
  std::size_t samples = 0;   // N_s
  double interval = 0.0;     // T [s]
  double fs = 0.0;           // [Hz]
  bool empty_band = false;   // set when the frame carried no signal

  /// c_m[k], zero outside the stored hull.
  cdouble at(std::size_t m, std::int64_t k) const {
    const std::int64_t i = k - stored_first;
    if (i < 0 || i >= static_cast<std::int64_t>(stored_count)) return {};
    return coeffs[m * stored_count + static_cast<std::size_t>(i)];
  }
};

/// Fourier coefficients of the distortion function q_{k,m}(t; theta): the
/// LUT that applies dynamic-focus delays in the frequency domain. Entries
/// are stored as complex64 in (k, m, n) order, n in [-n_before, n_after].
/// After integrate_mf() the entries additionally carry the matched-filter
/// spectrum h[k-n], turning beamforming weights into compression weights.
struct QTable {
  double theta = 0.0;
  int n_before = 0;  // N1
  int n_after = 0;   // N2
  std::int64_t band_first = 0;
  std::size_t band_count = 0;  // K output bins
  std::size_t elements = 0;
  std::size_t samples = 0;  // N_s of the target frame
  double interval = 0.0;    // T [s]
  double sound_speed = 0.0;
  int oversample = 1;  // quadrature grid refinement used at build time
  bool mf_integrated = false;
  std::vector<std::complex<float>> entries;
  std::vector<double> offsets;  // geometry snapshot for cache validation
  std::uint64_t fingerprint = 0;

  int window_length() const { return n_before + n_after + 1; }  // N_q

  std::complex<float> entry(std::size_t kidx, std::size_t m, int n) const {
    const auto nq = static_cast<std::size_t>(window_length());
    return entries[(kidx * elements + m) * nq + static_cast<std::size_t>(n + n_before)];
  }
};

/// Beam Fourier coefficients over the (dilated) output band.
struct BeamSpectrum {
  std::vector<cdouble> coeffs;
  std::int64_t first = 0;
  double theta = 0.0;
  double interval = 0.0;
  std::size_t samples = 0;

  std::size_t coefficient_count() const { return coeffs.size(); }
};

/// Unnormalized DFT of the matched filter periodized into [0, T): the
/// spectrum h[k] such that c_m[k] * h[k] are the coefficients of the
/// circularly matched-filtered channel with echoes peaking at their
/// round-trip sample (the alignment convention shared with tdbf).
std::vector<cdouble> filter_spectrum(std::span<const double> mf, std::size_t samples);

/// DFT/N_s coefficients of every channel; the retained band hull is chosen
/// where the matched-filter output spectrum exceeds (peak - threshold_db),
/// then dilated by `guard` bins on each side for the convolution window.
SpectrumSet compute_channel_spectra(const ChannelFrame& f, std::span<const double> mf,
                                    double band_threshold_db, int guard);

/// Output band for a window (N1, N2) given the spectra band hull.
struct BandRange {
  std::int64_t first = 0;
  std::size_t count = 0;
};
BandRange band_for_window(const SpectrumSet& s, int n_before, int n_after);

/// Build the Q-coefficient LUT for one steering angle over `band` output
/// bins. The distortion function is sampled on an oversample*N_s grid and
/// transformed; coefficients n in [-N1, N2] are retained.
QTable build_q_table(const ArrayGeometry& g, double theta, BandRange band, int n_before,
                     int n_after, double interval, std::size_t samples, int oversample = 1,
                     unsigned workers = 1);

/// Fold the matched-filter spectrum into the weights: Q~[n] = h[k-n] Q[n].
/// h_spectrum must cover all N_s bins.
QTable integrate_mf(QTable q, std::span<const cdouble> h_spectrum);

/// Subset an existing table to a narrower coefficient window (exact: the
/// retained coefficients do not depend on the window they were built for).
QTable narrowed(const QTable& q, int n_before, int n_after);

/// c_CE[k] = (1/M) sum_m sum_n c_m[k-n] Q~[n]; out-of-band c_m read as 0.
BeamSpectrum focus_beamform(const SpectrumSet& s, const QTable& q, MultTally* tally = nullptr);

/// Inverse DFT with out-of-band bins zeroed and Hermitian mirroring of the
/// one-sided band; the real part becomes the scan line (kind = focus).
BeamLine reconstruct_time(const BeamSpectrum& b, std::size_t samples);

/// Reference path: the untruncated, full-band evaluation of the same
/// frequency-domain beamformer, computed directly from the matched-filtered
/// channels without building a LUT. Equals the table path with all N_s
/// coefficients retained, and is the oracle-equivalence counterpart of
/// beamform_pre_compression.
BeamSpectrum beamform_spectrum_exact(const ChannelFrame& f, const ArrayGeometry& g, double theta,
                                     std::span<const double> mf, unsigned workers = 1);

void save_q_table(const std::filesystem::path& path, const QTable& q);
QTable load_q_table(const std::filesystem::path& path);

}  // namespace cebeam
