#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "polydeconv/grid_signal.hpp"
#include "polydeconv/kernel.hpp"

namespace polydeconv {

struct DeconvConfig {
  Kernel kernel = Kernel::gaussian();
  double epsilon = 0.55;
  int order = 90;
  /// Fraction of samples dropped on each side for error metrics.
  double edge_margin = 0.1;
  /// Scan phi_eps_hat up to Nyquist and attach a warning if 0 < phi_hat < 2 fails.
  bool admissibility_check = true;
  /// Stop once the interior update norm has grown 3 iterations in a row.
  bool auto_stop = false;
  ConvolutionMethod method = ConvolutionMethod::Auto;

  void validate() const;
};

struct SpectralSample {
  double xi = 0.0;        // physical frequency
  double phi_hat = 0.0;   // phi_eps_hat(xi)
  double factor = 0.0;    // 1 - (1 - phi_hat)^(n+1)
};

struct FilterStage {
  GridSignal unfiltered;
  Spectrum spectrum_before;
  Spectrum spectrum_after;
  std::optional<double> unfiltered_interior_error;
};

struct DeconvReport {
  GridSignal reconstruction;
  /// ||g - T x_m|| for m = 0..iterations.
  std::vector<double> residual_norms;
  /// Interior norm of the correction g - T x_m applied at step m.
  std::vector<double> update_norms;
  /// Sampled at the DFT bins from 0 to Nyquist.
  std::vector<SpectralSample> spectral_factor;
  std::optional<double> interior_error;
  std::vector<std::string> warnings;
  int iterations = 0;
  bool stopped_early = false;
  std::optional<std::uint64_t> seed;
  std::optional<FilterStage> filter;
};

/// x_n = sum_{k=0}^{n} (id - T)^k g via x_0 = g, x_{m+1} = x_m + (g - T x_m).
/// n convolutions build x_n; one more gives the final residual.
DeconvReport inverse_operator(const DeconvConfig& cfg, const GridSignal& g,
                              const GridSignal* reference = nullptr);

/// 1 - (1 - phi_eps_hat(xi))^(n+1). Even kernels only.
double spectral_factor(const DeconvConfig& cfg, double xi);
std::complex<double> spectral_factor_complex(const DeconvConfig& cfg, double xi);

/// inverse_operator followed by convolution with `filter`.
DeconvReport recover_with_filter(const DeconvConfig& cfg, const GridSignal& noisy,
                                 const KernelTaps& filter,
                                 const GridSignal* reference = nullptr);

/// Taps of h(t) = 2B sinc(2Bt) (normalized sinc) on |t| <= half_width,
/// multiplied by dt. Not renormalized.
KernelTaps make_sinc_filter(double bandwidth, double dt, double half_width = 6.0);
/// Single unit tap.
KernelTaps make_allpass_filter(double dt);

/// n samples of N(0, variance) from mt19937_64 seeded with `seed`.
/// variance == 0 gives exact zeros.
std::vector<double> gaussian_noise(std::size_t n, double variance, std::uint64_t seed);

/// Interior power of `signal` over interior power of `noise`.
double signal_to_noise(const GridSignal& signal, const std::vector<double>& noise,
                       double margin);

/// Independent signals deconvolved on worker threads; results keep input order.
std::vector<DeconvReport> inverse_operator_batch(const DeconvConfig& cfg,
                                                 std::span<const GridSignal> signals);

nlohmann::json config_to_json(const DeconvConfig& cfg);
nlohmann::json report_to_json(const DeconvReport& report);
void write_spectral_factor_csv(const std::vector<SpectralSample>& samples,
                               const std::filesystem::path& path);

}  // namespace polydeconv
