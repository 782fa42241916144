#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "polydeconv/grid_signal.hpp"
#include "polydeconv/polynomial.hpp"

namespace polydeconv {

/// Parameters of one experiment run. `defaults(id)` fills in the values for
/// fig1, fig2 or fig3; every field can be overridden afterwards.
struct ExperimentSpec {
  std::string id = "fig2";
  std::string kernel = "gaussian";
  std::filesystem::path kernel_csv;  // used when kernel == "tabulated"
  double epsilon = 0.55;
  int order = 90;    // n of the truncated series (fig2, fig3)
  int degree = 50;   // Taylor degree (fig1)
  double t0 = -6.0;
  double t1 = 6.0;
  std::size_t samples = 2048;
  double edge_margin = 0.1;
  bool auto_stop = false;
  double noise_variance = 0.5;
  std::uint64_t seed = 20240607;
  std::string filter = "sinc";  // sinc | allpass
  double filter_bandwidth = 1.0;
  double filter_half_width = 6.0;
  std::filesystem::path out_dir = ".";

  static ExperimentSpec defaults(std::string_view id);
  /// Every field except out_dir, so the summary does not depend on where it is written.
  nlohmann::json to_json() const;
};

/// Maclaurin polynomial of sin(5x) + sin(3x) up to x^degree.
Polynomial1D taylor_sin_mix(int degree);

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;  // relative to out_dir
};

/// Spectral peak of a reference signal near angular frequency omega: the
/// larger of the two bins bracketing omega / (2 pi).
std::size_t peak_bin(const Spectrum& reference, double omega);

/// Median |X_k| over positive-frequency bins within +-window (angular units)
/// of `peak`, skipping every bin within one of any entry of `exclude`.
double local_noise_floor(const Spectrum& sp, std::size_t peak,
                         const std::vector<std::size_t>& exclude, double window = 2.0);

ExperimentResult run_fig1(const ExperimentSpec& spec);
ExperimentResult run_fig2(const ExperimentSpec& spec);
ExperimentResult run_fig3(const ExperimentSpec& spec);
ExperimentResult run_experiment(const ExperimentSpec& spec);

}  // namespace polydeconv
