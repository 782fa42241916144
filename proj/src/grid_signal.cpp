#include "polydeconv/grid_signal.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "polydeconv/errors.hpp"
#include "polydeconv/fft.hpp"

namespace polydeconv {

namespace {

using detail::format_double;

std::vector<double> convolve_direct(const std::vector<double>& s, const KernelTaps& k) {
  const auto n = static_cast<std::ptrdiff_t>(s.size());
  const auto m = static_cast<std::ptrdiff_t>(k.taps.size());
  const auto c = static_cast<std::ptrdiff_t>(k.center);
  std::vector<double> out(s.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // source index i + c - j must lie in [0, n); the range is never empty
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, i + c - (n - 1));
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(m - 1, i + c);
    // seeding with the first product keeps a single unit tap an exact copy
    double acc = k.taps[static_cast<std::size_t>(j_lo)] * s[static_cast<std::size_t>(i + c - j_lo)];
    for (std::ptrdiff_t j = j_lo + 1; j <= j_hi; ++j) {
      acc += k.taps[static_cast<std::size_t>(j)] * s[static_cast<std::size_t>(i + c - j)];
    }
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

std::vector<double> convolve_fft(const std::vector<double>& s, const KernelTaps& k) {
  const std::size_t full = s.size() + k.taps.size() - 1;
  const std::size_t len = fft::next_power_of_two(full);
  std::vector<fft::Complex> a(len, 0.0);
  std::vector<fft::Complex> b(len, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) a[i] = s[i];
  for (std::size_t i = 0; i < k.taps.size(); ++i) b[i] = k.taps[i];
  fft::radix2(a, false);
  fft::radix2(b, false);
  for (std::size_t i = 0; i < len; ++i) a[i] *= b[i];
  fft::radix2(a, true);
  const double scale = 1.0 / static_cast<double>(len);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = a[i + k.center].real() * scale;
  return out;
}

}  // namespace

GridSignal::GridSignal(double t0, double dt, std::vector<double> values)
    : t0_(t0), dt_(dt), values_(std::move(values)) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("signal dt must be positive");
  if (!std::isfinite(t0)) throw InvalidParameter("signal t0 must be finite");
  if (values_.size() < 2) throw InvalidInput("a signal needs at least 2 samples");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InvalidInput("signal contains non-finite samples");
  }
}

bool GridSignal::same_grid(const GridSignal& other) const {
  return t0_ == other.t0_ && dt_ == other.dt_ && values_.size() == other.values_.size();
}

GridSignal GridSignal::with_values(std::vector<double> values) const {
  if (values.size() != values_.size()) throw InvalidParameter("sample count mismatch");
  return GridSignal(t0_, dt_, std::move(values));
}

double Spectrum::frequency(std::size_t k) const {
  const std::size_t n = bins.size();
  const double signed_k = (2 * k <= n) ? static_cast<double>(k)
                                       : static_cast<double>(k) - static_cast<double>(n);
  return signed_k * df;
}

GridSignal sample_function(const std::function<double(double)>& f, double t0, double t1,
                           std::size_t n) {
  if (!(t1 > t0)) throw InvalidParameter("sample_function needs t1 > t0");
  if (n < 2) throw InvalidParameter("sample_function needs n >= 2");
  const double dt = (t1 - t0) / static_cast<double>(n - 1);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n) ? t1 : t0 + static_cast<double>(i) * dt;
    values[i] = f(t);
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "non-finite sample at t = " << t;
      throw InvalidInput(msg.str());
    }
  }
  return GridSignal(t0, dt, std::move(values));
}

KernelTaps discretize_kernel(const Kernel& kernel, double epsilon, double dt) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  const double lobe = epsilon * kernel.central_lobe_width();
  if (dt * 8.0 > lobe) {
    std::ostringstream msg;
    msg << "kernel under-resolved: dt = " << dt << " gives fewer than 8 samples across "
        << lobe;
    throw ResolutionError(msg.str());
  }
  const double reach = epsilon * kernel.support_radius();
  const auto half = static_cast<std::size_t>(std::floor(reach / dt + 1e-9));

  KernelTaps out;
  out.dt = dt;
  out.center = half;
  out.taps.resize(2 * half + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.taps.size(); ++i) {
    const double x = (static_cast<double>(i) - static_cast<double>(half)) * dt;
    out.taps[i] = kernel.eval(epsilon, x) * dt;
    sum += out.taps[i];
  }
  if (!(sum > 0.0)) throw ResolutionError("kernel taps have non-positive sum");
  for (double& t : out.taps) t /= sum;
  return out;
}

GridSignal convolve_signal(const GridSignal& s, const KernelTaps& taps,
                           ConvolutionMethod method) {
  if (taps.taps.empty() || taps.center >= taps.taps.size()) {
    throw InvalidParameter("empty or malformed kernel taps");
  }
  if (std::abs(taps.dt - s.dt()) > 1e-12 * s.dt()) {
    std::ostringstream msg;
    msg << "kernel taps sampled at dt = " << taps.dt << " but signal has dt = " << s.dt();
    throw InvalidParameter(msg.str());
  }
  if (method == ConvolutionMethod::Auto) {
    method = taps.taps.size() < kFftCrossover ? ConvolutionMethod::Direct
                                              : ConvolutionMethod::Fft;
  }
  std::vector<double> out = method == ConvolutionMethod::Direct
                                ? convolve_direct(s.values(), taps)
                                : convolve_fft(s.values(), taps);
  return s.with_values(std::move(out));
}

Spectrum dft(const GridSignal& s) {
  std::vector<fft::Complex> data(s.values().begin(), s.values().end());
  Spectrum sp;
  sp.df = 1.0 / (static_cast<double>(s.size()) * s.dt());
  sp.bins = fft::forward(data);
  return sp;
}

GridSignal idft(const Spectrum& sp, double t0) {
  if (sp.bins.size() < 2) throw InvalidParameter("spectrum needs at least 2 bins");
  if (!(sp.df > 0.0)) throw InvalidParameter("spectrum df must be positive");
  const std::vector<fft::Complex> z = fft::inverse(sp.bins);
  std::vector<double> values(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) values[i] = z[i].real();
  const double dt = 1.0 / (static_cast<double>(sp.bins.size()) * sp.df);
  return GridSignal(t0, dt, std::move(values));
}

InteriorRange interior(std::size_t n, double margin) {
  if (!(margin >= 0.0 && margin < 0.5)) throw InvalidParameter("edge margin must be in [0, 0.5)");
  const auto cut = static_cast<std::size_t>(std::floor(margin * static_cast<double>(n)));
  return {cut, n - cut};
}

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

double interior_relative_l2(const GridSignal& a, const GridSignal& reference, double margin) {
  if (a.size() != reference.size()) throw InvalidParameter("signals differ in length");
  const InteriorRange r = interior(a.size(), margin);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = r.begin; i < r.end; ++i) {
    const double d = a[i] - reference[i];
    num += d * d;
    den += reference[i] * reference[i];
  }
  if (den == 0.0) return std::sqrt(num);
  return std::sqrt(num / den);
}

void write_signal_csv(const GridSignal& s, std::ostream& out) {
  out << "t,value\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_double(s.time(i)) << ',' << format_double(s[i]) << '\n';
  }
}

void write_signal_csv(const GridSignal& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_signal_csv(s, out);
}

GridSignal read_signal_csv(const std::filesystem::path& path) {
  const auto rows = detail::read_numeric_csv(path, 2);
  if (rows.size() < 2) throw FormatError(path.string() + ": a signal needs at least 2 samples");
  const double t0 = rows.front()[0];
  const double dt = (rows.back()[0] - t0) / static_cast<double>(rows.size() - 1);
  if (!(dt > 0.0)) throw FormatError(path.string() + ": time column must increase");
  std::vector<double> values;
  values.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double expected = t0 + static_cast<double>(i) * dt;
    if (std::abs(rows[i][0] - expected) > 1e-6 * dt) {
      throw FormatError(path.string() + ": samples are not uniformly spaced at row " +
                        std::to_string(i + 1));
    }
    values.push_back(rows[i][1]);
  }
  try {
    return GridSignal(t0, dt, std::move(values));
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_spectrum_csv(const Spectrum& sp, std::ostream& out, double magnitude_scale) {
  out << "freq,re,im,abs\n";
  for (std::size_t k = 0; k < sp.size(); ++k) {
    const std::complex<double> z = sp.bins[k] * magnitude_scale;
    out << format_double(sp.frequency(k)) << ',' << format_double(z.real()) << ','
        << format_double(z.imag()) << ',' << format_double(std::abs(z)) << '\n';
  }
}

void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path,
                        double magnitude_scale) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  write_spectrum_csv(sp, out, magnitude_scale);
}

}  // namespace polydeconv
