#include "cebeam/dsp.hpp"

#include <fftw3.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace cebeam::dsp {

namespace {

// FFTW planning is not thread safe; execution through the new-array API is.
// Plans are created with FFTW_UNALIGNED so they stay valid for any buffer.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache c;
    return c;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<cdouble> in(n), out(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n),
                                   reinterpret_cast<fftw_complex*>(in.data()),
                                   reinterpret_cast<fftw_complex*>(out.data()),
                                   sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plans_.emplace(key, p);
    return p;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

std::vector<cdouble> transform(std::span<const cdouble> x, int sign) {
  if (x.empty()) return {};
  fftw_plan p = PlanCache::instance().get(x.size(), sign);
  std::vector<cdouble> in(x.begin(), x.end());
  std::vector<cdouble> out(x.size());
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<cdouble> fft(std::span<const cdouble> x) { return transform(x, FFTW_FORWARD); }

std::vector<cdouble> fft(std::span<const double> x) {
  std::vector<cdouble> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i];
  return transform(c, FFTW_FORWARD);
}

std::vector<cdouble> ifft_unscaled(std::span<const cdouble> x) {
  return transform(x, FFTW_BACKWARD);
}

std::vector<double> convolve_full(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t n = a.size() + b.size() - 1;
  std::vector<cdouble> pa(n), pb(n);
  for (std::size_t i = 0; i < a.size(); ++i) pa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) pb[i] = b[i];
  auto fa = fft(std::span<const cdouble>(pa));
  auto fb = fft(std::span<const cdouble>(pb));
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  auto conv = ifft_unscaled(fa);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = conv[i].real() / static_cast<double>(n);
  return out;
}

std::vector<double> analytic_envelope(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  auto spec = fft(x);
  // one-sided spectrum: keep DC and Nyquist, double positive frequencies
  const std::size_t half = n / 2;
  for (std::size_t k = 1; k < (n + 1) / 2; ++k) spec[k] *= 2.0;
  for (std::size_t k = half + 1; k < n; ++k) spec[k] = 0.0;
  auto z = ifft_unscaled(spec);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) env[i] = std::abs(z[i]) / static_cast<double>(n);
  return env;
}

double sample_linear(std::span<const double> v, double x) {
  if (v.empty() || x < 0.0) return 0.0;
  const double last = static_cast<double>(v.size() - 1);
  if (x > last) return 0.0;
  const std::size_t j = static_cast<std::size_t>(x);
  const double frac = x - static_cast<double>(j);
  if (j == v.size() - 1) return frac == 0.0 ? v[j] : v[j] * (1.0 - frac);
  return v[j] + frac * (v[j + 1] - v[j]);
}

double tukey(double u, double taper) {
  if (u < 0.0 || u >= 1.0) return 0.0;
  if (taper <= 0.0) return 1.0;
  const double h = 0.5 * taper;
  if (u < h) return 0.5 * (1.0 + std::cos(std::numbers::pi * (u / h - 1.0)));
  if (u > 1.0 - h) return 0.5 * (1.0 + std::cos(std::numbers::pi * (u - 1.0 + h) / h));
  return 1.0;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  pool.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Hasher& Hasher::add_bytes(const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    state_ ^= b[i];
    state_ *= 1099511628211ull;
  }
  return *this;
}

Hasher& Hasher::add(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return add(bits);
}

Hasher& Hasher::add(std::uint64_t v) { return add_bytes(&v, sizeof(v)); }

Hasher& Hasher::add(std::int64_t v) { return add_bytes(&v, sizeof(v)); }

Hasher& Hasher::add(const std::string& s) { return add_bytes(s.data(), s.size()); }

}  // namespace cebeam::dsp
