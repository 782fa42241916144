#pragma once
// Reference computations that share no code with the library. They are slow
// and simple on purpose.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr long double kPi = std::numbers::pi_v<long double>;

/// Moments of exp(-(x/2)^2)/sqrt(4 pi): c_2k = (2k-1)!! 2^k, odd ones vanish.
inline double gaussian_moment(int m) {
  if (m % 2 == 1) return 0.0;
  double c = 1.0;
  for (int j = 1; j < m; j += 2) c *= 2.0 * j;
  return c;
}

inline double gaussian_density(double x) {
  return std::exp(-0.25 * x * x) / std::sqrt(4.0 * std::numbers::pi);
}

inline double raw_bump(double x) {
  return std::abs(x) < 1.0 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0;
}

inline double tanh_sinh(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, 1e-14);
}

inline double bump_area() {
  static const double area = tanh_sinh(raw_bump, -1.0, 1.0);
  return area;
}

inline double bump_density(double x) { return raw_bump(x) / bump_area(); }

inline double bump_moment(int m) {
  if (m % 2 == 1) return 0.0;
  return tanh_sinh([m](double x) { return std::pow(x, m) * raw_bump(x); }, -1.0, 1.0) /
         bump_area();
}

inline double horner(const std::vector<double>& a, double x) {
  double s = 0.0;
  for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * x + *it;
  return s;
}

/// (p * phi_eps)(x) = int p(x - y) phi_eps(y) dy by quadrature over |y| <= radius * eps.
inline double convolve_at(const std::vector<double>& p, const std::function<double(double)>& density,
                          double radius, double eps, double x) {
  auto integrand = [&](double y) { return horner(p, x - y) * density(y / eps) / eps; };
  return tanh_sinh(integrand, -radius * eps, 0.0) + tanh_sinh(integrand, 0.0, radius * eps);
}

/// C(n, k) from Pascal's triangle in exact integers (n <= 60).
inline std::uint64_t pascal(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i) {
    for (int j = i; j > 0; --j) row[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j - 1)];
  }
  return row[static_cast<std::size_t>(k)];
}

/// Unnormalized DFT by the O(N^2) sum with twiddles reduced mod N.
inline std::vector<std::complex<long double>> dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<long double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      const long double angle = -2.0L * kPi * static_cast<long double>((j * k) % n) / n;
      acc += static_cast<long double>(x[j]) * std::complex<long double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

/// y_i = sum_j taps_j s_{i + center - j}, zero outside [0, N).
inline std::vector<long double> convolve(const std::vector<long double>& s,
                                         const std::vector<double>& taps, std::size_t center) {
  const auto n = static_cast<long>(s.size());
  std::vector<long double> out(s.size(), 0.0L);
  for (long i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (long j = 0; j < static_cast<long>(taps.size()); ++j) {
      const long src = i + static_cast<long>(center) - j;
      if (src >= 0 && src < n) acc += static_cast<long double>(taps[static_cast<std::size_t>(j)]) * s[static_cast<std::size_t>(src)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

/// Powers T^0 g, ..., T^n g of the discrete operator in long double.
inline std::vector<std::vector<long double>> powers(const std::vector<double>& g,
                                                    const std::vector<double>& taps,
                                                    std::size_t center, int n) {
  std::vector<std::vector<long double>> out;
  out.emplace_back(g.begin(), g.end());
  for (int k = 1; k <= n; ++k) out.push_back(convolve(out.back(), taps, center));
  return out;
}

/// sum_{k=0}^{n} (-1)^k C(n+1, k+1) T^k g, given the powers.
inline std::vector<double> binomial_inverse(const std::vector<std::vector<long double>>& tk, int n) {
  std::vector<long double> acc(tk[0].size(), 0.0L);
  for (int k = 0; k <= n; ++k) {
    const long double c = static_cast<long double>(pascal(n + 1, k + 1)) * ((k % 2 == 0) ? 1.0L : -1.0L);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c * tk[static_cast<std::size_t>(k)][i];
  }
  return {acc.begin(), acc.end()};
}

/// Sum of a few random sinusoids with physical frequency below f_max.
inline std::vector<double> bandlimited(std::mt19937_64& rng, const std::vector<double>& t,
                                       double f_max, int components = 6) {
  std::uniform_real_distribution<double> freq(0.0, f_max);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::vector<double> out(t.size(), 0.0);
  for (int c = 0; c < components; ++c) {
    const double f = freq(rng);
    const double ph = phase(rng);
    const double a = amp(rng) / components;
    for (std::size_t i = 0; i < t.size(); ++i) {
      out[i] += a * std::cos(2.0 * std::numbers::pi * f * t[i] + ph);
    }
  }
  return out;
}

inline std::vector<double> random_coeffs(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (double& x : c) x = u(rng);
  // keep the leading coefficient away from zero so the degree is what we asked for
  if (std::abs(c.back()) < 0.25) c.back() = c.back() < 0 ? -0.5 : 0.5;
  return c;
}

}  // namespace oracle
