#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "polydeconv/kernel.hpp"

namespace polydeconv {

/// Real samples values[i] = f(t0 + i * dt).
class GridSignal {
 public:
  GridSignal(double t0, double dt, std::vector<double> values);

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return values_.size(); }
  double time(std::size_t i) const { return t0_ + static_cast<double>(i) * dt_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Same (t0, dt, N) exactly.
  bool same_grid(const GridSignal& other) const;
  /// Copy with new values on this grid.
  GridSignal with_values(std::vector<double> values) const;

 private:
  double t0_;
  double dt_;
  std::vector<double> values_;
};

/// DFT bins, DC first; bin k sits at frequency k * df (k > N/2 aliases to
/// (k - N) * df).
struct Spectrum {
  double df = 0.0;
  std::vector<std::complex<double>> bins;

  std::size_t size() const { return bins.size(); }
  /// Signed physical frequency of bin k.
  double frequency(std::size_t k) const;
};

/// Sampled convolution kernel; taps[center] is the value at offset 0.
struct KernelTaps {
  std::vector<double> taps;
  std::size_t center = 0;
  double dt = 0.0;

  std::size_t half_width() const { return center; }
};

enum class ConvolutionMethod { Auto, Direct, Fft };

/// Tap count below which Auto uses the direct sum.
inline constexpr std::size_t kFftCrossover = 64;

GridSignal sample_function(const std::function<double(double)>& f, double t0, double t1,
                           std::size_t n);

/// phi_eps sampled at i * dt on a symmetric grid covering eps * support_radius,
/// scaled by dt and renormalized to unit sum.
KernelTaps discretize_kernel(const Kernel& kernel, double epsilon, double dt);

/// Zero-padded linear convolution cropped back to the input window.
GridSignal convolve_signal(const GridSignal& s, const KernelTaps& taps,
                           ConvolutionMethod method = ConvolutionMethod::Auto);

Spectrum dft(const GridSignal& s);
/// Inverse transform onto a grid starting at t0 with dt = 1 / (N df).
/// Imaginary residue is discarded.
GridSignal idft(const Spectrum& sp, double t0);

/// Indices [begin, end) after dropping `margin` of the samples on each side.
struct InteriorRange {
  std::size_t begin = 0;
  std::size_t end = 0;
};
InteriorRange interior(std::size_t n, double margin);

double l2_norm(const std::vector<double>& v);
/// ||a - b|| / ||b|| over the interior range.
double interior_relative_l2(const GridSignal& a, const GridSignal& reference, double margin);

// CSV: `t,value` for signals and `freq,re,im,abs` for spectra.
void write_signal_csv(const GridSignal& s, const std::filesystem::path& path);
void write_signal_csv(const GridSignal& s, std::ostream& out);
GridSignal read_signal_csv(const std::filesystem::path& path);
void write_spectrum_csv(const Spectrum& sp, const std::filesystem::path& path,
                        double magnitude_scale = 1.0);
void write_spectrum_csv(const Spectrum& sp, std::ostream& out, double magnitude_scale = 1.0);

}  // namespace polydeconv
