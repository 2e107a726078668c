#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cebeam::dsp {

using cdouble = std::complex<double>;

/// Forward DFT, X[k] = sum_j x[j] exp(-2*pi*i*k*j/N). Any length.
std::vector<cdouble> fft(std::span<const cdouble> x);
std::vector<cdouble> fft(std::span<const double> x);

/// Inverse DFT without the 1/N factor: x[j] = sum_k X[k] exp(+2*pi*i*k*j/N).
std::vector<cdouble> ifft_unscaled(std::span<const cdouble> x);

/// Full linear convolution, length a.size()+b.size()-1, computed in the
/// frequency domain.
std::vector<double> convolve_full(std::span<const double> a, std::span<const double> b);

/// Magnitude of the analytic signal (one-sided spectrum method).
std::vector<double> analytic_envelope(std::span<const double> x);

/// Linear interpolation at fractional index x; zero outside [0, size-1].
double sample_linear(std::span<const double> v, double x);

/// Tapered-cosine (Tukey) profile at normalized position u in [0,1).
/// taper = 0 gives a rectangular profile, taper = 1 a full cosine.
double tukey(double u, double taper);

/// Shortest round-trip decimal formatting (locale independent).
std::string format_double(double v);

/// Run fn(i) for i in [0, n) on up to `workers` threads. Deterministic as
/// long as tasks write to disjoint state.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

/// FNV-1a content hashing for cache fingerprints.
class Hasher {
 public:
  Hasher& add_bytes(const void* p, std::size_t n);
  Hasher& add(double v);
  Hasher& add(std::uint64_t v);
  Hasher& add(std::int64_t v);
  Hasher& add(const std::string& s);
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 1469598103934665603ull;
};

}  // namespace cebeam::dsp
