#include "polydeconv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "csv.hpp"
#include "polydeconv/deconvolution.hpp"
#include "polydeconv/errors.hpp"

namespace polydeconv {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPeakOmegas[] = {3.0, 5.0};

double sin_mix(double t) { return std::sin(5.0 * t) + std::sin(3.0 * t); }

Kernel make_kernel(const ExperimentSpec& spec) {
  if (spec.kernel == "tabulated") {
    if (spec.kernel_csv.empty()) throw InvalidParameter("tabulated kernel needs a kernel CSV path");
    return Kernel::load_csv(spec.kernel_csv, Parity::Even);
  }
  return Kernel::from_name(spec.kernel);
}

void validate_grid(const ExperimentSpec& spec) {
  if (!(spec.t1 > spec.t0)) throw InvalidParameter("experiment grid needs t1 > t0");
  if (spec.samples < 2) throw InvalidParameter("experiment grid needs at least 2 samples");
  if (!(spec.epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
}

void write_columns(const std::filesystem::path& path, const std::string& header,
                   const std::vector<const std::vector<double>*>& columns) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << header << '\n';
  const std::size_t rows = columns.front()->size();
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c > 0) out << ',';
      out << detail::format_double((*columns[c])[i]);
    }
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<double> times(const GridSignal& s) {
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) t[i] = s.time(i);
  return t;
}

std::vector<double> difference(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return d;
}

double max_abs(const std::vector<double>& v, std::size_t begin, std::size_t end) {
  double m = 0.0;
  for (std::size_t i = begin; i < end; ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

void write_residuals(const std::filesystem::path& path, const DeconvReport& report) {
  std::vector<double> index(report.residual_norms.size());
  for (std::size_t m = 0; m < index.size(); ++m) index[m] = static_cast<double>(m);
  write_columns(path, "m,residual,update", {&index, &report.residual_norms, &report.update_norms});
}

void write_kernel_samples(const std::filesystem::path& path, const Kernel& kernel,
                          double epsilon, const KernelTaps& taps) {
  std::vector<double> t(taps.taps.size());
  std::vector<double> v(taps.taps.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = (static_cast<double>(i) - static_cast<double>(taps.center)) * taps.dt;
    v[i] = kernel.eval(epsilon, t[i]);
  }
  write_columns(path, "t,value", {&t, &v});
}

nlohmann::json peak_report(const Spectrum& reference, const Spectrum& sp, double dt,
                           bool with_floor) {
  std::vector<std::size_t> bins;
  for (double omega : kPeakOmegas) bins.push_back(peak_bin(reference, omega));
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const std::size_t k = bins[i];
    const double ref = std::abs(reference.bins[k]) * dt;
    const double mag = std::abs(sp.bins[k]) * dt;
    nlohmann::json entry = {{"omega", kPeakOmegas[i]},
                            {"bin", k},
                            {"frequency", reference.frequency(k)},
                            {"reference_magnitude", ref},
                            {"magnitude", mag},
                            {"magnitude_ratio", mag / ref}};
    if (with_floor) {
      const double floor = local_noise_floor(sp, k, bins) * dt;
      entry["noise_floor"] = floor;
      entry["peak_to_floor"] = floor > 0.0 ? mag / floor : std::numeric_limits<double>::infinity();
    }
    out.push_back(entry);
  }
  return out;
}

nlohmann::json base_summary(const ExperimentSpec& spec) {
  return {{"experiment", spec.id},
          {"config", spec.to_json()},
          {"grid_reconstructed", true},
          {"grid_note", "plot domain and sample count are not published; chosen for this artifact"}};
}

DeconvConfig deconv_config(const ExperimentSpec& spec, Kernel kernel) {
  DeconvConfig cfg;
  cfg.kernel = std::move(kernel);
  cfg.epsilon = spec.epsilon;
  cfg.order = spec.order;
  cfg.edge_margin = spec.edge_margin;
  cfg.auto_stop = spec.auto_stop;
  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentSpec ExperimentSpec::defaults(std::string_view id) {
  ExperimentSpec spec;
  spec.id = std::string(id);
  if (id == "fig1") {
    spec.kernel = "bump";
    spec.epsilon = 0.9;
    spec.degree = 50;
    spec.t0 = -2.0;
    spec.t1 = 2.0;
    spec.samples = 2001;
  } else if (id == "fig2" || id == "fig3") {
    spec.kernel = "gaussian";
    spec.epsilon = 0.55;
    spec.order = 90;
    spec.t0 = -6.0;
    spec.t1 = 6.0;
    spec.samples = 2048;
  } else {
    throw InvalidParameter("unknown experiment '" + std::string(id) + "'");
  }
  return spec;
}

nlohmann::json ExperimentSpec::to_json() const {
  nlohmann::json j = {{"id", id},
                      {"kernel", kernel},
                      {"epsilon", epsilon},
                      {"grid", {{"t0", t0}, {"t1", t1}, {"samples", samples}}},
                      {"edge_margin", edge_margin}};
  if (kernel == "tabulated") j["kernel_csv"] = kernel_csv.generic_string();
  if (id == "fig1") {
    j["degree"] = degree;
  } else {
    j["order"] = order;
    j["auto_stop"] = auto_stop;
  }
  if (id == "fig3") {
    j["noise"] = {{"variance", noise_variance}, {"seed", seed}};
    j["filter"] = {{"type", filter},
                   {"bandwidth", filter_bandwidth},
                   {"half_width", filter_half_width}};
  }
  return j;
}

Polynomial1D taylor_sin_mix(int degree) {
  if (degree < 1) throw InvalidParameter("Taylor degree must be at least 1");
  std::vector<Real> coeffs(static_cast<std::size_t>(degree) + 1, Real(0));
  Real p5(1);
  Real p3(1);
  Real factorial(1);
  for (int k = 1; k <= degree; ++k) {
    p5 *= 5;
    p3 *= 3;
    factorial *= k;
    if (k % 2 == 1) {
      const Real term = (p5 + p3) / factorial;
      coeffs[static_cast<std::size_t>(k)] = ((k - 1) / 2 % 2 == 0) ? term : Real(-term);
    }
  }
  return Polynomial1D(std::move(coeffs));
}

std::size_t peak_bin(const Spectrum& reference, double omega) {
  const std::size_t n = reference.size();
  if (n < 4 || !(reference.df > 0.0)) throw InvalidParameter("spectrum too short for peak search");
  const double kappa = omega / (kTwoPi * reference.df);
  const auto lo = static_cast<std::size_t>(std::floor(kappa));
  const std::size_t hi = lo + 1;
  if (hi > n / 2) throw InvalidParameter("peak frequency above Nyquist");
  return std::abs(reference.bins[hi]) > std::abs(reference.bins[lo]) ? hi : lo;
}

double local_noise_floor(const Spectrum& sp, std::size_t peak,
                         const std::vector<std::size_t>& exclude, double window) {
  const double omega_peak = kTwoPi * sp.frequency(peak);
  std::vector<double> mags;
  for (std::size_t k = 1; 2 * k <= sp.size(); ++k) {
    if (std::abs(kTwoPi * sp.frequency(k) - omega_peak) > window) continue;
    const auto near = [k](std::size_t e) { return (k > e ? k - e : e - k) <= 1; };
    if (near(peak) || std::any_of(exclude.begin(), exclude.end(), near)) continue;
    mags.push_back(std::abs(sp.bins[k]));
  }
  if (mags.empty()) throw InvalidParameter("no bins left to estimate the noise floor");
  std::sort(mags.begin(), mags.end());
  const std::size_t mid = mags.size() / 2;
  return mags.size() % 2 == 1 ? mags[mid] : 0.5 * (mags[mid - 1] + mags[mid]);
}

ExperimentResult run_fig1(const ExperimentSpec& spec) {
  validate_grid(spec);
  const Kernel kernel = make_kernel(spec);
  const Polynomial1D p = taylor_sin_mix(spec.degree);
  const ConvOperator op(kernel, spec.epsilon, spec.degree);
  const Polynomial1D q = convolve_poly(op, p);
  const Polynomial1D recovered = invert_poly(op, q);
  const double coeff_error = relative_coeff_error(recovered, p);

  // coefficient path, evaluated in extended precision
  const double dt = (spec.t1 - spec.t0) / static_cast<double>(spec.samples - 1);
  const GridSignal grid(spec.t0, dt, std::vector<double>(spec.samples, 0.0));
  const std::vector<double> t = times(grid);
  std::vector<double> pv(t.size()), qv(t.size()), rv(t.size()), ev(t.size()), sinv(t.size());
  double taylor_deviation = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const Real x(t[i]);
    const Real a = p.eval(x);
    const Real b = recovered.eval(x);
    pv[i] = to_double(a);
    qv[i] = to_double(q.eval(x));
    rv[i] = to_double(b);
    ev[i] = to_double(b - a);
    sinv[i] = sin_mix(t[i]);
    taylor_deviation = std::max(taylor_deviation, std::abs(pv[i] - sinv[i]));
  }
  double pointwise_error = max_abs(ev, 0, ev.size());

  // sampled analogue: zero-padded discrete convolution, then the same
  // binomial inverse applied to sampled iterates
  const GridSignal ps = grid.with_values(pv);
  const KernelTaps taps = discretize_kernel(kernel, spec.epsilon, ps.dt());
  const GridSignal gs = convolve_signal(ps, taps);
  const int m = std::max(p.exact_degree(), 0) / 2 + 1;
  std::vector<double> x(gs.size());
  GridSignal current = gs;
  Real binom(m);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = m * gs[i];
  for (int j = 1; j < m; ++j) {
    current = convolve_signal(current, taps);
    binom *= Real(m - j);
    binom /= Real(j + 1);
    const double w = to_double((j % 2 == 0) ? binom : Real(-binom));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += w * current[i];
  }
  const std::vector<double> sampled_error = difference(x, pv);
  const InteriorRange range = interior(x.size(), spec.edge_margin);
  const double sampled_interior = interior_relative_l2(gs.with_values(x), ps, spec.edge_margin);
  const double sampled_edge_max =
      std::max(max_abs(sampled_error, 0, range.begin), max_abs(sampled_error, range.end, x.size()));
  const double sampled_interior_max = max_abs(sampled_error, range.begin, range.end);

  std::filesystem::create_directories(spec.out_dir);
  ExperimentResult result;
  write_columns(spec.out_dir / "polynomial.csv", "t,p,conv,recovered,error", {&t, &pv, &qv, &rv, &ev});
  write_columns(spec.out_dir / "sampled.csv", "t,p,conv,recovered,error",
                {&t, &pv, &gs.values(), &x, &sampled_error});
  write_json(spec.out_dir / "coefficients.json",
             {{"p", to_json(p)}, {"conv", to_json(q)}, {"recovered", to_json(recovered)}});
  write_kernel_samples(spec.out_dir / "kernel.csv", kernel, spec.epsilon, taps);
  result.files = {"polynomial.csv", "sampled.csv", "coefficients.json", "kernel.csv", "summary.json"};

  result.summary = base_summary(spec);
  result.summary["results"] = {
      {"coefficient_roundtrip_error", coeff_error},
      {"pointwise_max_error", pointwise_error},
      {"taylor_max_deviation", taylor_deviation},
      {"convolutions", m - 1},
      {"sampled",
       {{"interior_relative_l2", sampled_interior},
        {"interior_max_abs_error", sampled_interior_max},
        {"edge_max_abs_error", sampled_edge_max},
        {"convolutions", m},
        {"note", "zero padding outside the window contaminates a band that widens by "
                 "the kernel radius with every convolution"}}}};
  write_json(spec.out_dir / "summary.json", result.summary);
  return result;
}

ExperimentResult run_fig2(const ExperimentSpec& spec) {
  validate_grid(spec);
  const DeconvConfig cfg = deconv_config(spec, make_kernel(spec));
  const GridSignal f = sample_function(sin_mix, spec.t0, spec.t1, spec.samples);
  const KernelTaps taps = discretize_kernel(cfg.kernel, cfg.epsilon, f.dt());
  const GridSignal g = convolve_signal(f, taps);
  const DeconvReport report = inverse_operator(cfg, g, &f);

  const Spectrum sf = dft(f);
  const Spectrum sg = dft(g);
  const Spectrum sx = dft(report.reconstruction);
  const std::vector<double> t = times(f);

  std::filesystem::create_directories(spec.out_dir);
  ExperimentResult result;
  write_columns(spec.out_dir / "signals.csv", "t,f,blurred,reconstruction",
                {&t, &f.values(), &g.values(), &report.reconstruction.values()});
  write_signal_csv(report.reconstruction, spec.out_dir / "reconstruction.csv");
  write_kernel_samples(spec.out_dir / "kernel.csv", cfg.kernel, cfg.epsilon, taps);
  write_spectrum_csv(sf, spec.out_dir / "spectrum_f.csv", f.dt());
  write_spectrum_csv(sg, spec.out_dir / "spectrum_blurred.csv", f.dt());
  write_spectrum_csv(sx, spec.out_dir / "spectrum_reconstruction.csv", f.dt());
  write_spectral_factor_csv(report.spectral_factor, spec.out_dir / "spectral_factor.csv");
  write_residuals(spec.out_dir / "residuals.csv", report);
  result.files = {"signals.csv",       "reconstruction.csv",          "kernel.csv",
                  "spectrum_f.csv",    "spectrum_blurred.csv",        "spectrum_reconstruction.csv",
                  "spectral_factor.csv", "residuals.csv",             "summary.json"};

  result.summary = base_summary(spec);
  result.summary["deconvolution"] = config_to_json(cfg);
  result.summary["report"] = report_to_json(report);
  result.summary["results"] = {
      {"interior_error", *report.interior_error},
      {"blurred_interior_error", interior_relative_l2(g, f, cfg.edge_margin)},
      {"peaks", peak_report(sf, sx, f.dt(), false)}};
  write_json(spec.out_dir / "summary.json", result.summary);
  return result;
}

ExperimentResult run_fig3(const ExperimentSpec& spec) {
  validate_grid(spec);
  const DeconvConfig cfg = deconv_config(spec, make_kernel(spec));
  const GridSignal f = sample_function(sin_mix, spec.t0, spec.t1, spec.samples);
  const KernelTaps taps = discretize_kernel(cfg.kernel, cfg.epsilon, f.dt());
  const GridSignal clean = convolve_signal(f, taps);
  const std::vector<double> noise = gaussian_noise(f.size(), spec.noise_variance, spec.seed);
  std::vector<double> noisy_values(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) noisy_values[i] = clean[i] + noise[i];
  const GridSignal noisy = f.with_values(std::move(noisy_values));

  KernelTaps filter;
  if (spec.filter == "sinc") {
    filter = make_sinc_filter(spec.filter_bandwidth, f.dt(), spec.filter_half_width);
  } else if (spec.filter == "allpass") {
    filter = make_allpass_filter(f.dt());
  } else {
    throw InvalidParameter("unknown filter '" + spec.filter + "' (expected sinc or allpass)");
  }

  DeconvReport report = recover_with_filter(cfg, noisy, filter, &f);
  report.seed = spec.seed;
  const FilterStage& stage = *report.filter;

  const Spectrum sf = dft(f);
  const Spectrum sn = dft(noisy);
  const std::vector<double> t = times(f);
  std::vector<double> filter_t(filter.taps.size());
  for (std::size_t i = 0; i < filter_t.size(); ++i) {
    filter_t[i] = (static_cast<double>(i) - static_cast<double>(filter.center)) * filter.dt;
  }

  std::filesystem::create_directories(spec.out_dir);
  ExperimentResult result;
  write_columns(spec.out_dir / "signals.csv", "t,f,blurred,noisy,unfiltered,filtered",
                {&t, &f.values(), &clean.values(), &noisy.values(), &stage.unfiltered.values(),
                 &report.reconstruction.values()});
  write_signal_csv(report.reconstruction, spec.out_dir / "reconstruction.csv");
  write_kernel_samples(spec.out_dir / "kernel.csv", cfg.kernel, cfg.epsilon, taps);
  write_columns(spec.out_dir / "filter.csv", "t,tap", {&filter_t, &filter.taps});
  write_spectrum_csv(sf, spec.out_dir / "spectrum_f.csv", f.dt());
  write_spectrum_csv(sn, spec.out_dir / "spectrum_noisy.csv", f.dt());
  write_spectrum_csv(stage.spectrum_before, spec.out_dir / "spectrum_unfiltered.csv", f.dt());
  write_spectrum_csv(stage.spectrum_after, spec.out_dir / "spectrum_filtered.csv", f.dt());
  write_spectral_factor_csv(report.spectral_factor, spec.out_dir / "spectral_factor.csv");
  write_residuals(spec.out_dir / "residuals.csv", report);
  result.files = {"signals.csv",           "reconstruction.csv",      "kernel.csv",
                  "filter.csv",            "spectrum_f.csv",          "spectrum_noisy.csv",
                  "spectrum_unfiltered.csv", "spectrum_filtered.csv", "spectral_factor.csv",
                  "residuals.csv",         "summary.json"};

  double tap_sum = 0.0;
  for (double v : filter.taps) tap_sum += v;
  result.summary = base_summary(spec);
  result.summary["deconvolution"] = config_to_json(cfg);
  result.summary["report"] = report_to_json(report);
  nlohmann::json snr = nullptr;
  if (spec.noise_variance > 0.0) snr = signal_to_noise(clean, noise, cfg.edge_margin);
  result.summary["results"] = {
      {"snr", snr},
      {"snr_definition", "interior sum of squares of the blurred signal over that of the noise"},
      {"interior_error_filtered", *report.interior_error},
      {"interior_error_unfiltered", *stage.unfiltered_interior_error},
      {"filter_dc_gain", tap_sum},
      {"peaks_filtered", peak_report(sf, stage.spectrum_after, f.dt(), true)},
      {"peaks_unfiltered", peak_report(sf, stage.spectrum_before, f.dt(), true)}};
  write_json(spec.out_dir / "summary.json", result.summary);
  return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  if (spec.id == "fig1") return run_fig1(spec);
  if (spec.id == "fig2") return run_fig2(spec);
  if (spec.id == "fig3") return run_fig3(spec);
  throw InvalidParameter("unknown experiment '" + spec.id + "'");
}

}  // namespace polydeconv
