#include "polydeconv/deconvolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "csv.hpp"
#include "polydeconv/errors.hpp"

namespace polydeconv {

namespace {

constexpr std::size_t kAdmissibilityGrid = 4097;
constexpr int kAutoStopRun = 3;

double factor_from_phi_hat(double phi_hat, int order) {
  const double power = static_cast<double>(order) + 1.0;
  // (1 - phi)^(n+1) underflows gracefully in log form when 0 < phi <= 1
  if (phi_hat > 0.0 && phi_hat <= 1.0) return -std::expm1(power * std::log1p(-phi_hat));
  return 1.0 - std::pow(1.0 - phi_hat, power);
}

double interior_norm(const std::vector<double>& v, const InteriorRange& range) {
  double sum = 0.0;
  for (std::size_t i = range.begin; i < range.end; ++i) sum += v[i] * v[i];
  return std::sqrt(sum);
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::string admissibility_warning(const DeconvConfig& cfg, double nyquist) {
  const AdmissibilityReport r = cfg.kernel.check_admissible(cfg.epsilon, nyquist, kAdmissibilityGrid);
  if (r.admissible) return {};
  std::ostringstream msg;
  msg << "kernel is not admissible for eps = " << cfg.epsilon << " on |xi| <= " << nyquist
      << ": phi_hat ranges over [" << static_cast<double>(r.min_value) << ", "
      << static_cast<double>(r.max_value) << "] with " << r.violations.size()
      << " violating grid points and " << r.zero_crossings.size()
      << " sign changes; the series need not converge for non-polynomial input";
  return msg.str();
}

}  // namespace

void DeconvConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidParameter("epsilon must be positive");
  }
  if (order < 1) throw InvalidParameter("order n must be at least 1");
  if (!(edge_margin >= 0.0 && edge_margin < 0.5)) {
    throw InvalidParameter("edge margin must be in [0, 0.5)");
  }
}

DeconvReport inverse_operator(const DeconvConfig& cfg, const GridSignal& g,
                              const GridSignal* reference) {
  cfg.validate();
  if (reference != nullptr && !reference->same_grid(g)) {
    throw InvalidParameter("reference signal must share the input grid");
  }
  const KernelTaps taps = discretize_kernel(cfg.kernel, cfg.epsilon, g.dt());
  const InteriorRange range = interior(g.size(), cfg.edge_margin);

  std::vector<std::string> warnings;
  const double nyquist = 0.5 / g.dt();
  if (cfg.admissibility_check) {
    if (std::string w = admissibility_warning(cfg, nyquist); !w.empty()) {
      warnings.push_back(std::move(w));
    }
  }

  std::vector<double> residuals;
  std::vector<double> updates;
  residuals.reserve(static_cast<std::size_t>(cfg.order) + 1);
  updates.reserve(static_cast<std::size_t>(cfg.order) + 1);

  std::vector<double> x = g.values();
  std::vector<double> correction(g.size());
  int iterations = 0;
  bool stopped_early = false;
  int growth_run = 0;

  for (int m = 0;; ++m) {
    std::vector<double> tx;
    try {
      tx = convolve_signal(g.with_values(x), taps, cfg.method).values();
    } catch (const InvalidInput&) {
      throw DivergenceError("non-finite value while convolving iterate " + std::to_string(m),
                            static_cast<std::size_t>(m));
    }
    for (std::size_t i = 0; i < x.size(); ++i) correction[i] = g[i] - tx[i];
    if (!all_finite(correction)) {
      throw DivergenceError("non-finite residual at iteration " + std::to_string(m),
                            static_cast<std::size_t>(m));
    }
    residuals.push_back(l2_norm(correction));
    updates.push_back(interior_norm(correction, range));

    if (m == cfg.order) break;
    if (cfg.auto_stop && m > 0) {
      growth_run = updates[static_cast<std::size_t>(m)] > updates[static_cast<std::size_t>(m - 1)]
                       ? growth_run + 1
                       : 0;
      if (growth_run >= kAutoStopRun) {
        stopped_early = true;
        break;
      }
    }

    for (std::size_t i = 0; i < x.size(); ++i) x[i] += correction[i];
    if (!all_finite(x)) {
      throw DivergenceError("iterate " + std::to_string(m + 1) + " is not finite",
                            static_cast<std::size_t>(m + 1));
    }
    iterations = m + 1;
  }

  DeconvReport report{.reconstruction = g.with_values(std::move(x)),
                      .residual_norms = std::move(residuals),
                      .update_norms = std::move(updates),
                      .spectral_factor = {},
                      .interior_error = std::nullopt,
                      .warnings = std::move(warnings),
                      .iterations = iterations,
                      .stopped_early = stopped_early,
                      .seed = std::nullopt,
                      .filter = std::nullopt};
  if (stopped_early) {
    report.warnings.push_back("stopped after " + std::to_string(iterations) +
                              " iterations: update norm grew " +
                              std::to_string(kAutoStopRun) + " times in a row");
  }

  const double df = 1.0 / (static_cast<double>(g.size()) * g.dt());
  if (cfg.kernel.is_even()) {
    for (std::size_t k = 0; 2 * k <= g.size(); ++k) {
      const double xi = static_cast<double>(k) * df;
      const double phi_hat = cfg.kernel.fourier(cfg.epsilon, xi);
      report.spectral_factor.push_back({xi, phi_hat, factor_from_phi_hat(phi_hat, cfg.order)});
    }
  }
  if (reference != nullptr) {
    report.interior_error = interior_relative_l2(report.reconstruction, *reference, cfg.edge_margin);
  }
  return report;
}

double spectral_factor(const DeconvConfig& cfg, double xi) {
  cfg.validate();
  if (!cfg.kernel.is_even()) {
    throw InvalidParameter("the real spectral factor needs an even kernel; use the complex form");
  }
  return factor_from_phi_hat(cfg.kernel.fourier(cfg.epsilon, xi), cfg.order);
}

std::complex<double> spectral_factor_complex(const DeconvConfig& cfg, double xi) {
  cfg.validate();
  const std::complex<double> phi_hat = cfg.kernel.fourier_complex(cfg.epsilon, xi);
  return 1.0 - std::pow(1.0 - phi_hat, cfg.order + 1);
}

DeconvReport recover_with_filter(const DeconvConfig& cfg, const GridSignal& noisy,
                                 const KernelTaps& filter, const GridSignal* reference) {
  DeconvReport report = inverse_operator(cfg, noisy, reference);
  GridSignal filtered = convolve_signal(report.reconstruction, filter, ConvolutionMethod::Auto);

  FilterStage stage{.unfiltered = report.reconstruction,
                    .spectrum_before = dft(report.reconstruction),
                    .spectrum_after = dft(filtered),
                    .unfiltered_interior_error = report.interior_error};
  report.reconstruction = std::move(filtered);
  if (reference != nullptr) {
    report.interior_error = interior_relative_l2(report.reconstruction, *reference, cfg.edge_margin);
  }
  report.filter = std::move(stage);
  return report;
}

KernelTaps make_sinc_filter(double bandwidth, double dt, double half_width) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw InvalidParameter("filter bandwidth must be positive");
  }
  if (!(dt > 0.0)) throw InvalidParameter("filter dt must be positive");
  if (!(half_width > 0.0)) throw InvalidParameter("filter half width must be positive");
  // main lobe spans |t| < 1/(2B)
  if (dt * 8.0 * bandwidth > 1.0) {
    std::ostringstream msg;
    msg << "sinc filter under-resolved: dt = " << dt << " exceeds 1/(8B) = "
        << 1.0 / (8.0 * bandwidth);
    throw ResolutionError(msg.str());
  }
  const auto half = static_cast<std::size_t>(std::floor(half_width / dt + 1e-9));
  KernelTaps out;
  out.dt = dt;
  out.center = half;
  out.taps.resize(2 * half + 1);
  for (std::size_t i = 0; i < out.taps.size(); ++i) {
    const double t = (static_cast<double>(i) - static_cast<double>(half)) * dt;
    const double arg = std::numbers::pi * 2.0 * bandwidth * t;
    const double sinc = (i == half) ? 1.0 : std::sin(arg) / arg;
    out.taps[i] = 2.0 * bandwidth * sinc * dt;
  }
  return out;
}

KernelTaps make_allpass_filter(double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("filter dt must be positive");
  return KernelTaps{.taps = {1.0}, .center = 0, .dt = dt};
}

std::vector<double> gaussian_noise(std::size_t n, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) {
    throw InvalidParameter("noise variance must be non-negative");
  }
  std::vector<double> out(n, 0.0);
  if (variance == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (double& v : out) v = dist(rng);
  return out;
}

double signal_to_noise(const GridSignal& signal, const std::vector<double>& noise,
                       double margin) {
  if (noise.size() != signal.size()) throw InvalidParameter("noise length mismatch");
  const InteriorRange range = interior(signal.size(), margin);
  double ps = 0.0;
  double pn = 0.0;
  for (std::size_t i = range.begin; i < range.end; ++i) {
    ps += signal[i] * signal[i];
    pn += noise[i] * noise[i];
  }
  if (pn == 0.0) return std::numeric_limits<double>::infinity();
  return ps / pn;
}

std::vector<DeconvReport> inverse_operator_batch(const DeconvConfig& cfg,
                                                 std::span<const GridSignal> signals) {
  std::vector<std::optional<DeconvReport>> slots(signals.size());
  std::vector<std::exception_ptr> errors(signals.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers =
      std::min<std::size_t>(signals.size(), std::max(1u, std::thread::hardware_concurrency()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < signals.size(); i = next++) {
          try {
            slots[i] = inverse_operator(cfg, signals[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  std::vector<DeconvReport> out;
  out.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

nlohmann::json config_to_json(const DeconvConfig& cfg) {
  const char* method = cfg.method == ConvolutionMethod::Direct ? "direct"
                       : cfg.method == ConvolutionMethod::Fft  ? "fft"
                                                               : "auto";
  return {{"kernel", std::string(to_string(cfg.kernel.family()))},
          {"parity", std::string(to_string(cfg.kernel.parity()))},
          {"epsilon", cfg.epsilon},
          {"order", cfg.order},
          {"edge_margin", cfg.edge_margin},
          {"admissibility_check", cfg.admissibility_check},
          {"auto_stop", cfg.auto_stop},
          {"method", method}};
}

nlohmann::json report_to_json(const DeconvReport& report) {
  const GridSignal& x = report.reconstruction;
  nlohmann::json j = {
      {"grid", {{"t0", x.t0()}, {"dt", x.dt()}, {"n", x.size()}}},
      {"iterations", report.iterations},
      {"stopped_early", report.stopped_early},
      {"residual_norms", report.residual_norms},
      {"update_norms", report.update_norms},
      {"interior_error", nullptr},
      {"warnings", report.warnings},
  };
  if (report.interior_error) j["interior_error"] = *report.interior_error;
  if (report.seed) j["seed"] = *report.seed;
  if (report.filter) {
    j["filter"] = {{"unfiltered_interior_error", nullptr}};
    if (report.filter->unfiltered_interior_error) {
      j["filter"]["unfiltered_interior_error"] = *report.filter->unfiltered_interior_error;
    }
  }
  return j;
}

void write_spectral_factor_csv(const std::vector<SpectralSample>& samples,
                               const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "xi,phi_hat,factor\n";
  for (const SpectralSample& s : samples) {
    out << detail::format_double(s.xi) << ',' << detail::format_double(s.phi_hat) << ','
        << detail::format_double(s.factor) << '\n';
  }
}

}  // namespace polydeconv
