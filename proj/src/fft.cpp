#include "polydeconv/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "polydeconv/errors.hpp"

namespace polydeconv::fft {

namespace {

// e^{sign 2 pi i k / n}, evaluated directly per entry to avoid recurrence drift.
std::vector<Complex> twiddles(std::size_t n, double sign) {
  std::vector<Complex> w(n / 2);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(n);
    w[k] = {std::cos(angle), std::sin(angle)};
  }
  return w;
}

std::vector<Complex> bluestein(std::span<const Complex> data, bool inverse) {
  const std::size_t n = data.size();
  const double sign = inverse ? 1.0 : -1.0;
  // chirp w_k = e^{sign i pi k^2 / n}; k^2 mod 2n keeps the angle small
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double angle = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = {std::cos(angle), std::sin(angle)};
  }
  const std::size_t m = next_power_of_two(2 * n - 1);
  std::vector<Complex> a(m, Complex(0.0, 0.0));
  std::vector<Complex> b(m, Complex(0.0, 0.0));
  for (std::size_t k = 0; k < n; ++k) a[k] = data[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  radix2(a, false);
  radix2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  radix2(a, true);

  std::vector<Complex> out(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

std::vector<Complex> transform(std::span<const Complex> data, bool inverse) {
  if (data.empty()) return {};
  if (is_power_of_two(data.size())) {
    std::vector<Complex> out(data.begin(), data.end());
    radix2(out, inverse);
    return out;
  }
  return bluestein(data, inverse);
}

}  // namespace

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void radix2(std::span<Complex> data, bool inverse) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) throw InvalidParameter("radix-2 FFT length must be a power of two");
  if (n == 1) return;

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  const std::vector<Complex> w = twiddles(n, inverse ? 1.0 : -1.0);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex t = w[k * stride] * data[start + k + half];
        const Complex u = data[start + k];
        data[start + k] = u + t;
        data[start + k + half] = u - t;
      }
    }
  }
}

std::vector<Complex> forward(std::span<const Complex> data) { return transform(data, false); }

std::vector<Complex> inverse(std::span<const Complex> data) {
  std::vector<Complex> out = transform(data, true);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (Complex& z : out) z *= scale;
  return out;
}

}  // namespace polydeconv::fft
