#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace polydeconv {

enum class KernelFamily { Gaussian, Bump, Tabulated };
enum class Parity { Even, General };

std::string_view to_string(KernelFamily family) noexcept;
std::string_view to_string(Parity parity) noexcept;
KernelFamily parse_kernel_family(std::string_view name);
Parity parse_parity(std::string_view name);

/// Result of scanning the scaled Fourier transform for the 0 < phi_hat < 2
/// condition on a uniform frequency grid.
struct AdmissibilityReport {
  bool admissible = false;
  // long double so that deep Gaussian tails stay representable as > 0
  long double min_value = 0.0L;
  long double max_value = 0.0L;
  double min_log_value = 0.0;  // log of the smallest |phi_hat|; -inf at a zero
  double xi_at_min = 0.0;
  double xi_at_max = 0.0;
  double xi_max = 0.0;
  std::size_t n_grid = 0;
  std::vector<double> violations;      // grid points with phi_hat <= 0 or >= 2
  std::vector<double> zero_crossings;  // midpoints of sign changes
};

/// A unit-area convolution kernel phi and its dilations
/// phi_eps(x) = phi(x / eps) / eps.
///
/// Kernels are cheap to copy; copies share one immutable description and a
/// thread-safe moment cache.
class Kernel {
 public:
  /// phi(x) = exp(-(x/2)^2) / sqrt(4 pi), truncated at |x| <= 10 sqrt(2).
  static Kernel gaussian();
  /// phi(x) proportional to exp(-1 / (1 - x^2)) on (-1, 1).
  static Kernel bump();
  /// Linearly interpolated samples; x strictly increasing. The samples are
  /// rescaled to unit trapezoid area. An even declaration is spot-checked.
  static Kernel tabulated(std::vector<double> x, std::vector<double> values,
                          Parity parity);
  /// Two-column CSV (x, value); an optional non-numeric header line is skipped.
  static Kernel load_csv(const std::filesystem::path& path, Parity parity);
  static Kernel from_name(std::string_view family);

  KernelFamily family() const noexcept;
  Parity parity() const noexcept;
  bool is_even() const noexcept { return parity() == Parity::Even; }
  /// Constant the raw density was divided by to reach unit area.
  double normalization() const noexcept;
  /// |x| beyond which phi is exactly zero.
  double support_radius() const noexcept;
  /// Width resolved by the sampling rule: 8 taps must fit across
  /// eps * central_lobe_width().
  double central_lobe_width() const noexcept;

  /// Unscaled normalized density phi(x).
  double density(double x) const;
  /// phi_eps(x) = phi(x / eps) / eps.
  double eval(double epsilon, double x) const;

  /// c_m = integral of x^m phi(x). c_0 is 1 and odd m of an even kernel is 0, both exactly.
  double moment(int m) const;
  /// Moment of phi_eps: c_m eps^m (zero for odd m when even).
  double scaled_moment(double epsilon, int m) const;

  /// phi_eps_hat(xi) = phi_hat(eps xi) with f_hat(xi) = int f(x) e^{-2 pi i xi x}.
  /// Requires an even kernel; general kernels have complex transforms.
  double fourier(double epsilon, double xi) const;
  std::complex<double> fourier_complex(double epsilon, double xi) const;

  AdmissibilityReport check_admissible(double epsilon, double xi_max,
                                       std::size_t n_grid) const;

 private:
  struct Impl;
  explicit Kernel(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace polydeconv
