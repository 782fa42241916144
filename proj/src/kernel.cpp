#include "polydeconv/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "csv.hpp"
#include "polydeconv/errors.hpp"
#include "polydeconv/quadrature.hpp"

namespace polydeconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kGaussianRadius = 10.0 * std::numbers::sqrt2;
const double kSqrt4Pi = std::sqrt(4.0 * std::numbers::pi);

double raw_bump(double x) {
  const double s = 1.0 - x * x;
  if (s <= 0.0) return 0.0;
  return std::exp(-1.0 / s);
}

void require_positive_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    std::ostringstream msg;
    msg << "epsilon must be positive and finite, got " << epsilon;
    throw InvalidParameter(msg.str());
  }
}

}  // namespace

struct Kernel::Impl {
  KernelFamily family = KernelFamily::Gaussian;
  Parity parity = Parity::Even;
  double normalization = 1.0;
  double support_radius = 0.0;
  double lower = 0.0;  // support is [lower, upper]
  double upper = 0.0;
  std::vector<double> xs;      // tabulated grid
  std::vector<double> values;  // normalized tabulated samples

  mutable std::mutex cache_mutex;
  mutable std::map<int, double> moment_cache;

  double density(double x) const {
    if (x < lower || x > upper) return 0.0;
    switch (family) {
      case KernelFamily::Gaussian:
        return std::exp(-0.25 * x * x) / normalization;
      case KernelFamily::Bump:
        return raw_bump(x) / normalization;
      case KernelFamily::Tabulated: {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        if (it == xs.end()) return values.back();
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        if (hi == 0) return values.front();
        const std::size_t lo = hi - 1;
        const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
        return (1.0 - w) * values[lo] + w * values[hi];
      }
    }
    return 0.0;
  }

  // Trapezoid sum of g(x_i) * phi(x_i) over the tabulated grid.
  template <typename T, typename G>
  T trapezoid(G&& g) const {
    T sum(0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double h = xs[i + 1] - xs[i];
      sum += 0.5 * h * (g(xs[i]) * values[i] + g(xs[i + 1]) * values[i + 1]);
    }
    return sum;
  }

  // Exact moment of the piecewise-linear interpolant. On [a, b] with
  // phi = c + s x the integral is s D(m+2)/(m+2) + c D(m+1)/(m+1) where
  // D(k) = b^k - a^k = (b - a) sum_i b^i a^(k-1-i) avoids cancellation.
  double linear_moment(int m) const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double a = xs[i];
      const double b = xs[i + 1];
      const double h = b - a;
      const double s = (values[i + 1] - values[i]) / h;
      const double c = values[i] - s * a;
      auto power_gap = [a, b, h](int k) {
        double sum = 0.0;
        double bp = 1.0;
        for (int j = 0; j < k; ++j) {
          sum += bp * std::pow(a, k - 1 - j);
          bp *= b;
        }
        return h * sum;
      };
      total += s * power_gap(m + 2) / (m + 2) + c * power_gap(m + 1) / (m + 1);
    }
    return total;
  }

  // Exact transform of the piecewise-linear interpolant, segment by segment
  // about each midpoint.
  std::complex<double> linear_transform(double w) const {
    std::complex<double> total(0.0, 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double h = xs[i + 1] - xs[i];
      const double mid = 0.5 * (xs[i] + xs[i + 1]);
      const double f_mid = 0.5 * (values[i] + values[i + 1]);
      const double s = (values[i + 1] - values[i]) / h;
      const double theta = 0.5 * w * h;
      double sinc = 1.0;
      double q = 0.0;  // (sin t - t cos t) / t^2
      if (std::abs(theta) < 1e-3) {
        const double t2 = theta * theta;
        sinc = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
        q = theta / 3.0 - theta * t2 / 30.0;
      } else {
        sinc = std::sin(theta) / theta;
        q = (std::sin(theta) - theta * std::cos(theta)) / (theta * theta);
      }
      const std::complex<double> seg(f_mid * h * sinc, -0.5 * s * h * h * q);
      total += std::polar(1.0, -w * mid) * seg;
    }
    return total;
  }

  double compute_moment(int m) const {
    if (family == KernelFamily::Tabulated) return linear_moment(m);
    auto integrand = [this, m](double x) {
      return std::pow(x, m) * density(x);
    };
    // split at the origin so both halves see a smooth, one-signed integrand
    return integrate_or_throw(integrand, lower, 0.0) +
           integrate_or_throw(integrand, 0.0, upper);
  }
};

Kernel::Kernel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Kernel Kernel::gaussian() {
  auto impl = std::make_shared<Impl>();
  impl->family = KernelFamily::Gaussian;
  impl->parity = Parity::Even;
  impl->normalization = kSqrt4Pi;
  impl->support_radius = kGaussianRadius;
  impl->lower = -kGaussianRadius;
  impl->upper = kGaussianRadius;
  return Kernel(std::move(impl));
}

Kernel Kernel::bump() {
  auto impl = std::make_shared<Impl>();
  impl->family = KernelFamily::Bump;
  impl->parity = Parity::Even;
  impl->support_radius = 1.0;
  impl->lower = -1.0;
  impl->upper = 1.0;
  QuadratureOptions tight;
  tight.abs_tol = 1e-15;
  tight.rel_tol = 1e-14;
  impl->normalization = 2.0 * integrate_or_throw(raw_bump, 0.0, 1.0, tight);
  return Kernel(std::move(impl));
}

Kernel Kernel::tabulated(std::vector<double> x, std::vector<double> values,
                         Parity parity) {
  if (x.size() != values.size()) {
    throw InvalidInput("tabulated kernel: x and value columns differ in length");
  }
  if (x.size() < 3) {
    throw InvalidInput("tabulated kernel needs at least 3 samples");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(values[i])) {
      throw InvalidInput("tabulated kernel contains non-finite samples");
    }
    if (i > 0 && !(x[i] > x[i - 1])) {
      throw InvalidInput("tabulated kernel x column must be strictly increasing");
    }
  }

  auto impl = std::make_shared<Impl>();
  impl->family = KernelFamily::Tabulated;
  impl->parity = parity;
  impl->xs = std::move(x);
  impl->values = std::move(values);
  impl->lower = impl->xs.front();
  impl->upper = impl->xs.back();
  impl->support_radius = std::max(std::abs(impl->lower), std::abs(impl->upper));

  const double area = impl->trapezoid<double>([](double) { return 1.0; });
  if (!(std::abs(area) > 0.0)) {
    throw InvalidInput("tabulated kernel has zero integral and cannot be normalized");
  }
  impl->normalization = area;
  for (double& v : impl->values) v /= area;

  if (parity == Parity::Even) {
    double peak = 0.0;
    for (double v : impl->values) peak = std::max(peak, std::abs(v));
    if (std::abs(impl->lower + impl->upper) > 1e-9 * impl->support_radius) {
      throw InvalidInput("tabulated kernel declared even but its grid is not symmetric");
    }
    for (double xi : impl->xs) {
      const double gap = std::abs(impl->density(xi) - impl->density(-xi));
      if (gap > 1e-8 * peak) {
        std::ostringstream msg;
        msg << "tabulated kernel declared even but phi(" << xi << ") != phi("
            << -xi << ")";
        throw InvalidInput(msg.str());
      }
    }
  }
  return Kernel(std::move(impl));
}

Kernel Kernel::load_csv(const std::filesystem::path& path, Parity parity) {
  const auto rows = detail::read_numeric_csv(path, 2);
  std::vector<double> x;
  std::vector<double> v;
  x.reserve(rows.size());
  v.reserve(rows.size());
  for (const auto& row : rows) {
    x.push_back(row[0]);
    v.push_back(row[1]);
  }
  try {
    return tabulated(std::move(x), std::move(v), parity);
  } catch (const InvalidInput& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Kernel Kernel::from_name(std::string_view family) {
  switch (parse_kernel_family(family)) {
    case KernelFamily::Gaussian:
      return gaussian();
    case KernelFamily::Bump:
      return bump();
    case KernelFamily::Tabulated:
      break;
  }
  throw InvalidParameter("tabulated kernels must be loaded from a file");
}

KernelFamily Kernel::family() const noexcept { return impl_->family; }
Parity Kernel::parity() const noexcept { return impl_->parity; }
double Kernel::normalization() const noexcept { return impl_->normalization; }
double Kernel::support_radius() const noexcept { return impl_->support_radius; }

double Kernel::central_lobe_width() const noexcept {
  switch (impl_->family) {
    case KernelFamily::Gaussian:
      return 1.0;
    case KernelFamily::Bump:
      return 2.0;
    case KernelFamily::Tabulated:
      return impl_->upper - impl_->lower;
  }
  return 1.0;
}

double Kernel::density(double x) const { return impl_->density(x); }

double Kernel::eval(double epsilon, double x) const {
  require_positive_epsilon(epsilon);
  return impl_->density(x / epsilon) / epsilon;
}

double Kernel::moment(int m) const {
  if (m < 0) throw InvalidParameter("moment order must be non-negative");
  if (m == 0) return 1.0;  // unit area by construction
  if (is_even() && m % 2 == 1) return 0.0;
  {
    std::lock_guard lock(impl_->cache_mutex);
    if (auto it = impl_->moment_cache.find(m); it != impl_->moment_cache.end()) {
      return it->second;
    }
  }
  const double value = impl_->compute_moment(m);
  std::lock_guard lock(impl_->cache_mutex);
  return impl_->moment_cache.emplace(m, value).first->second;
}

double Kernel::scaled_moment(double epsilon, int m) const {
  require_positive_epsilon(epsilon);
  if (m < 0) throw InvalidParameter("moment order must be non-negative");
  if (is_even() && m % 2 == 1) return 0.0;
  return moment(m) * std::pow(epsilon, m);
}

std::complex<double> Kernel::fourier_complex(double epsilon, double xi) const {
  require_positive_epsilon(epsilon);
  const double w = kTwoPi * epsilon * xi;
  const Impl& k = *impl_;
  switch (k.family) {
    case KernelFamily::Gaussian:
      return {std::exp(-w * w), 0.0};
    case KernelFamily::Bump: {
      auto integrand = [&k, w](double x) { return k.density(x) * std::cos(w * x); };
      return {2.0 * integrate_or_throw(integrand, 0.0, 1.0), 0.0};
    }
    case KernelFamily::Tabulated: {
      const std::complex<double> z = k.linear_transform(w);
      if (k.parity == Parity::Even) return {z.real(), 0.0};
      return z;
    }
  }
  return {0.0, 0.0};
}

double Kernel::fourier(double epsilon, double xi) const {
  if (!is_even()) {
    throw InvalidParameter(
        "fourier() needs an even kernel; use fourier_complex() for general kernels");
  }
  return fourier_complex(epsilon, xi).real();
}

AdmissibilityReport Kernel::check_admissible(double epsilon, double xi_max,
                                             std::size_t n_grid) const {
  require_positive_epsilon(epsilon);
  if (!(xi_max > 0.0)) throw InvalidParameter("xi_max must be positive");
  if (n_grid < 2) throw InvalidParameter("n_grid must be at least 2");

  AdmissibilityReport report;
  report.xi_max = xi_max;
  report.n_grid = n_grid;
  report.min_value = std::numeric_limits<long double>::infinity();
  report.max_value = -std::numeric_limits<long double>::infinity();

  const bool closed_form = impl_->family == KernelFamily::Gaussian;
  long double previous = 0.0L;
  double previous_xi = 0.0;
  for (std::size_t i = 0; i < n_grid; ++i) {
    const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(i) /
                                    static_cast<double>(n_grid - 1);
    long double value;
    double log_abs;
    bool imaginary_part = false;
    if (closed_form) {
      const double w = kTwoPi * epsilon * xi;
      log_abs = -w * w;
      value = std::exp(static_cast<long double>(log_abs));
    } else {
      const std::complex<double> z = fourier_complex(epsilon, xi);
      value = z.real();
      log_abs = std::log(std::abs(z.real()));
      imaginary_part = std::abs(z.imag()) > 1e-9;
    }

    if (value < report.min_value) {
      report.min_value = value;
      report.xi_at_min = xi;
    }
    if (value > report.max_value) {
      report.max_value = value;
      report.xi_at_max = xi;
    }
    if (i == 0 || log_abs < report.min_log_value) report.min_log_value = log_abs;

    // A Gaussian transform is positive everywhere even where it underflows.
    const bool positive = closed_form ? true : value > 0.0L;
    if (!positive || value >= 2.0L || imaginary_part) report.violations.push_back(xi);

    if (i > 0 && !closed_form) {
      if ((previous > 0.0L && value <= 0.0L) || (previous < 0.0L && value >= 0.0L)) {
        const long double t = previous / (previous - value);
        report.zero_crossings.push_back(previous_xi +
                                        static_cast<double>(t) * (xi - previous_xi));
      }
    }
    previous = value;
    previous_xi = xi;
  }
  report.admissible = report.violations.empty();
  return report;
}

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::Bump:
      return "bump";
    case KernelFamily::Tabulated:
      return "tabulated";
  }
  return "unknown";
}

std::string_view to_string(Parity parity) noexcept {
  return parity == Parity::Even ? "even" : "general";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "bump") return KernelFamily::Bump;
  if (name == "tabulated") return KernelFamily::Tabulated;
  throw InvalidParameter("unknown kernel family '" + std::string(name) + "'");
}

Parity parse_parity(std::string_view name) {
  if (name == "even") return Parity::Even;
  if (name == "general") return Parity::General;
  throw InvalidParameter("unknown parity '" + std::string(name) + "'");
}

}  // namespace polydeconv
