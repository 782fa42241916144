// polydeconv command-line driver.
//
// Exit codes: 0 success, 1 numeric or I/O failure, 2 usage or malformed input.
// Failures print {"error": {"kind": ..., "message": ...}} on stderr.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "polydeconv/deconvolution.hpp"
#include "polydeconv/errors.hpp"
#include "polydeconv/experiments.hpp"
#include "polydeconv/grid_signal.hpp"
#include "polydeconv/kernel.hpp"
#include "polydeconv/polynomial.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polydeconv;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int report_error(std::string_view kind, const std::string& message, int code) {
  const json err = {{"error", {{"kind", kind}, {"message", message}}}};
  std::cerr << err.dump() << '\n';
  return code;
}

struct KernelOptions {
  std::string family = "gaussian";
  std::string csv;
  std::string parity = "even";

  void attach(CLI::App* app) {
    app->add_option("--family", family, "gaussian, bump or tabulated")
        ->check(CLI::IsMember({"gaussian", "bump", "tabulated"}));
    app->add_option("--kernel-csv", csv, "x,value samples for a tabulated kernel");
    app->add_option("--parity", parity, "even or general (tabulated only)")
        ->check(CLI::IsMember({"even", "general"}));
  }

  Kernel make() const {
    if (family == "tabulated") {
      if (csv.empty()) throw InvalidParameter("--family tabulated needs --kernel-csv");
      return Kernel::load_csv(csv, parse_parity(parity));
    }
    return Kernel::from_name(family);
  }
};

json read_json(const std::string& path) {
  try {
    if (path == "-") return json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void emit_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << text;
}

void emit_json(const std::string& path, const json& j) { emit_text(path, j.dump(2) + "\n"); }

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// --config: `key = value` lines naming long options of the chosen subcommand.

std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path);
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (key.empty()) throw FormatError(path + ":" + std::to_string(line_no) + ": empty key");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// ---------------------------------------------------------------------------

struct Cli {
  CLI::App app{"Polynomial-exact and truncated-series deconvolution"};
  std::string config;
  std::function<void()> action;

  // shared option storage
  KernelOptions kernel;
  double epsilon = 1.0;
  int max_m = 8;
  double xi_max = 2.0;
  std::size_t points = 401;
  std::string input = "-";
  std::string output;
  std::string out_dir;
  std::string reference;
  int k = 1;
  std::optional<int> side;
  std::string method = "auto";
  bool scale_dt = false;
  int order = 90;
  double edge_margin = 0.1;
  bool no_admissibility = false;
  bool auto_stop = false;
  std::string filter = "none";
  double bandwidth = 1.0;
  double half_width = 6.0;
  // experiment overrides
  std::optional<std::string> x_kernel, x_kernel_csv, x_filter;
  std::optional<double> x_epsilon, x_t0, x_t1, x_variance, x_bandwidth, x_half_width, x_margin;
  std::optional<int> x_order, x_degree;
  std::optional<std::size_t> x_samples;
  std::optional<std::uint64_t> x_seed;
  std::optional<bool> x_auto_stop;

  Cli() {
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.add_option("--config", config, "key = value file of long options for the subcommand");
    build_kernel();
    build_poly();
    build_signal();
    build_deconv();
    build_experiment();
  }

  CLI::App* leaf(CLI::App* parent, const std::string& name, const std::string& help) {
    CLI::App* sub = parent->add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  }

  void build_kernel() {
    CLI::App* group = leaf(&app, "kernel", "kernel moments, transforms and admissibility");
    group->require_subcommand(1);

    CLI::App* moments = leaf(group, "moments", "moments c_m eps^m for m = 0..max-m");
    kernel.attach(moments);
    moments->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
    moments->add_option("--max-m", max_m)->check(CLI::NonNegativeNumber);
    moments->add_option("--out-dir", out_dir);
    moments->callback([this] { action = [this] { run_moments(); }; });

    CLI::App* fourier = leaf(group, "fourier", "phi_eps_hat on a uniform grid over [-xi-max, xi-max]");
    kernel.attach(fourier);
    fourier->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
    fourier->add_option("--xi-max", xi_max)->check(CLI::PositiveNumber);
    fourier->add_option("--points", points)->check(CLI::Range(2, 10000000));
    fourier->add_option("--out-dir", out_dir);
    fourier->callback([this] { action = [this] { run_fourier(); }; });

    CLI::App* check = leaf(group, "check", "scan for 0 < phi_eps_hat < 2");
    kernel.attach(check);
    check->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
    check->add_option("--xi-max", xi_max)->check(CLI::PositiveNumber);
    check->add_option("--points", points)->check(CLI::Range(2, 10000000));
    check->add_option("--out-dir", out_dir);
    check->callback([this] { action = [this] { run_check(); }; });
  }

  void build_poly() {
    CLI::App* group = leaf(&app, "poly", "exact operations on polynomial coefficients");
    group->require_subcommand(1);
    for (const char* name : {"conv", "deconv", "iterate"}) {
      CLI::App* sub = leaf(group, name,
                           std::string(name) == "conv"     ? "T_eps(p)"
                           : std::string(name) == "deconv" ? "exact inverse on P_n"
                                                           : "T_eps^k(p) or side polynomial p_j");
      kernel.attach(sub);
      sub->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
      sub->add_option("--input,-i", input, "polynomial JSON ('-' for stdin)");
      sub->add_option("--output,-o", output, "result JSON (stdout when omitted)");
      if (std::string(name) == "iterate") {
        sub->add_option("--k", k)->check(CLI::NonNegativeNumber);
        sub->add_option("--side", side, "emit side polynomial p_j instead")
            ->check(CLI::NonNegativeNumber);
      }
      const std::string op = name;
      sub->callback([this, op] { action = [this, op] { run_poly(op); }; });
    }
  }

  void build_signal() {
    CLI::App* group = leaf(&app, "signal", "sampled-signal convolution and spectra");
    group->require_subcommand(1);

    CLI::App* conv = leaf(group, "conv", "zero-padded convolution with phi_eps");
    kernel.attach(conv);
    conv->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
    conv->add_option("--input,-i", input, "t,value CSV")->required();
    conv->add_option("--output,-o", output, "t,value CSV (stdout when omitted)");
    conv->add_option("--method", method)->check(CLI::IsMember({"auto", "direct", "fft"}));
    conv->callback([this] { action = [this] { run_signal_conv(); }; });

    CLI::App* dft_cmd = leaf(group, "dft", "unnormalized DFT as freq,re,im,abs");
    dft_cmd->add_option("--input,-i", input, "t,value CSV")->required();
    dft_cmd->add_option("--output,-o", output, "spectrum CSV (stdout when omitted)");
    dft_cmd->add_flag("--scale-dt", scale_dt, "multiply bins by dt");
    dft_cmd->callback([this] { action = [this] { run_signal_dft(); }; });
  }

  void build_deconv() {
    CLI::App* group = leaf(&app, "deconv", "truncated-series deconvolution of sampled signals");
    group->require_subcommand(1);
    CLI::App* run = leaf(group, "run", "x_n from a blurred t,value CSV");
    kernel.attach(run);
    run->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
    run->add_option("--order,-n", order)->check(CLI::PositiveNumber);
    run->add_option("--input,-i", input, "blurred t,value CSV")->required();
    run->add_option("--reference", reference, "t,value CSV on the same grid for error metrics");
    run->add_option("--edge-margin", edge_margin);
    run->add_flag("--no-admissibility-check", no_admissibility);
    run->add_flag("--auto-stop", auto_stop);
    run->add_option("--method", method)->check(CLI::IsMember({"auto", "direct", "fft"}));
    run->add_option("--filter", filter)->check(CLI::IsMember({"none", "sinc", "allpass"}));
    run->add_option("--bandwidth", bandwidth)->check(CLI::PositiveNumber);
    run->add_option("--half-width", half_width)->check(CLI::PositiveNumber);
    run->add_option("--out-dir", out_dir)->required();
    run->callback([this] { action = [this] { run_deconv(); }; });
  }

  void build_experiment() {
    CLI::App* group = leaf(&app, "experiment", "reproduce the fig1, fig2 and fig3 pipelines");
    group->require_subcommand(1);
    for (const char* id : {"fig1", "fig2", "fig3"}) {
      CLI::App* sub = leaf(group, id, std::string("run ") + id);
      sub->add_option("--out-dir", out_dir, "output directory (default out/<id>)");
      sub->add_option("--kernel", x_kernel)->check(CLI::IsMember({"gaussian", "bump", "tabulated"}));
      sub->add_option("--kernel-csv", x_kernel_csv);
      sub->add_option("--epsilon", x_epsilon)->check(CLI::PositiveNumber);
      sub->add_option("--t0", x_t0);
      sub->add_option("--t1", x_t1);
      sub->add_option("--samples", x_samples)->check(CLI::Range(2, 100000000));
      sub->add_option("--edge-margin", x_margin);
      if (std::string(id) == "fig1") {
        sub->add_option("--degree", x_degree)->check(CLI::PositiveNumber);
      } else {
        sub->add_option("--order,-n", x_order)->check(CLI::PositiveNumber);
        sub->add_option("--auto-stop", x_auto_stop);
      }
      if (std::string(id) == "fig3") {
        sub->add_option("--variance", x_variance)->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", x_seed);
        sub->add_option("--filter", x_filter)->check(CLI::IsMember({"sinc", "allpass"}));
        sub->add_option("--bandwidth", x_bandwidth)->check(CLI::PositiveNumber);
        sub->add_option("--half-width", x_half_width)->check(CLI::PositiveNumber);
      }
      const std::string name = id;
      sub->callback([this, name] { action = [this, name] { run_experiment_cmd(name); }; });
    }
  }

  // -------------------------------------------------------------------------

  void run_moments() {
    const Kernel kern = kernel.make();
    std::vector<double> values;
    for (int m = 0; m <= max_m; ++m) values.push_back(kern.scaled_moment(epsilon, m));
    const json j = {{"family", to_string(kern.family())}, {"epsilon", epsilon}, {"moments", values}};
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_json_file(fs::path(out_dir) / "moments.json", j);
    }
    std::cout << j.dump(2) << '\n';
  }

  void run_fourier() {
    const Kernel kern = kernel.make();
    std::ostringstream csv;
    csv.precision(17);
    csv << "xi,re,im\n";
    for (std::size_t i = 0; i < points; ++i) {
      const double xi = -xi_max + 2.0 * xi_max * static_cast<double>(i) /
                                      static_cast<double>(points - 1);
      const std::complex<double> z = kern.fourier_complex(epsilon, xi);
      csv << xi << ',' << z.real() << ',' << z.imag() << '\n';
    }
    if (out_dir.empty()) {
      std::cout << csv.str();
      return;
    }
    fs::create_directories(out_dir);
    emit_text((fs::path(out_dir) / "fourier.csv").string(), csv.str());
  }

  void run_check() {
    const Kernel kern = kernel.make();
    const AdmissibilityReport r = kern.check_admissible(epsilon, xi_max, points);
    const json j = {{"family", to_string(kern.family())},
                    {"epsilon", epsilon},
                    {"admissible", r.admissible},
                    {"min_value", static_cast<double>(r.min_value)},
                    {"max_value", static_cast<double>(r.max_value)},
                    {"min_log_value", r.min_log_value},
                    {"xi_at_min", r.xi_at_min},
                    {"xi_at_max", r.xi_at_max},
                    {"xi_max", r.xi_max},
                    {"n_grid", r.n_grid},
                    {"violations", r.violations.size()},
                    {"zero_crossings", r.zero_crossings}};
    if (!out_dir.empty()) {
      fs::create_directories(out_dir);
      write_json_file(fs::path(out_dir) / "admissibility.json", j);
    }
    std::cout << j.dump(2) << '\n';
  }

  void run_poly(const std::string& op) {
    const Kernel kern = kernel.make();
    const json in = read_json(input);
    if (in.is_array()) {
      const Polynomial1D p = polynomial_from_json(in);
      const ConvOperator T(kern, epsilon, std::max(p.exact_degree(), 0));
      Polynomial1D out;
      if (op == "conv") {
        out = convolve_poly(T, p);
      } else if (op == "deconv") {
        out = invert_poly(T, p);
      } else if (side) {
        out = side_polynomial(T, p, *side);
      } else {
        out = iterate(T, p, k);
      }
      emit_json(output, to_json(out));
      return;
    }
    const MultiPolynomial p = multipolynomial_from_json(in);
    MultiPolynomial out(p.dim());
    if (op == "conv") {
      out = convolve_multipoly(kern, epsilon, p);
    } else if (op == "deconv") {
      out = invert_multipoly(kern, epsilon, p);
    } else {
      if (side) throw InvalidParameter("side polynomials are defined for one variable only");
      out = p;
      for (int i = 0; i < k; ++i) out = convolve_multipoly(kern, epsilon, out);
    }
    emit_json(output, to_json(out));
  }

  ConvolutionMethod conv_method() const {
    if (method == "direct") return ConvolutionMethod::Direct;
    if (method == "fft") return ConvolutionMethod::Fft;
    return ConvolutionMethod::Auto;
  }

  void run_signal_conv() {
    const Kernel kern = kernel.make();
    const GridSignal s = read_signal_csv(input);
    const GridSignal out = convolve_signal(s, discretize_kernel(kern, epsilon, s.dt()), conv_method());
    if (output.empty() || output == "-") {
      write_signal_csv(out, std::cout);
      return;
    }
    write_signal_csv(out, output);
  }

  void run_signal_dft() {
    const GridSignal s = read_signal_csv(input);
    const Spectrum sp = dft(s);
    const double scale = scale_dt ? s.dt() : 1.0;
    if (output.empty() || output == "-") {
      write_spectrum_csv(sp, std::cout, scale);
      return;
    }
    write_spectrum_csv(sp, output, scale);
  }

  void run_deconv() {
    DeconvConfig cfg;
    cfg.kernel = kernel.make();
    cfg.epsilon = epsilon;
    cfg.order = order;
    cfg.edge_margin = edge_margin;
    cfg.admissibility_check = !no_admissibility;
    cfg.auto_stop = auto_stop;
    cfg.method = conv_method();
    cfg.validate();

    const GridSignal g = read_signal_csv(input);
    std::optional<GridSignal> ref;
    if (!reference.empty()) ref = read_signal_csv(reference);
    const GridSignal* ref_ptr = ref ? &*ref : nullptr;

    DeconvReport report = [&] {
      if (filter == "none") return inverse_operator(cfg, g, ref_ptr);
      const KernelTaps taps = filter == "sinc" ? make_sinc_filter(bandwidth, g.dt(), half_width)
                                               : make_allpass_filter(g.dt());
      return recover_with_filter(cfg, g, taps, ref_ptr);
    }();

    const fs::path dir(out_dir);
    fs::create_directories(dir);
    write_signal_csv(report.reconstruction, dir / "reconstruction.csv");
    write_spectral_factor_csv(report.spectral_factor, dir / "spectral_factor.csv");
    write_spectrum_csv(dft(report.reconstruction), dir / "spectrum_reconstruction.csv", g.dt());
    if (report.filter) {
      write_signal_csv(report.filter->unfiltered, dir / "unfiltered.csv");
      write_spectrum_csv(report.filter->spectrum_before, dir / "spectrum_unfiltered.csv", g.dt());
    }
    json j = {{"config", config_to_json(cfg)},
              {"filter", {{"type", filter}, {"bandwidth", bandwidth}, {"half_width", half_width}}},
              {"report", report_to_json(report)}};
    write_json_file(dir / "report.json", j);
    std::cout << j.dump(2) << '\n';
  }

  void run_experiment_cmd(const std::string& id) {
    ExperimentSpec s = ExperimentSpec::defaults(id);
    if (x_kernel) s.kernel = *x_kernel;
    if (x_kernel_csv) s.kernel_csv = *x_kernel_csv;
    if (x_epsilon) s.epsilon = *x_epsilon;
    if (x_t0) s.t0 = *x_t0;
    if (x_t1) s.t1 = *x_t1;
    if (x_samples) s.samples = *x_samples;
    if (x_margin) s.edge_margin = *x_margin;
    if (x_degree) s.degree = *x_degree;
    if (x_order) s.order = *x_order;
    if (x_auto_stop) s.auto_stop = *x_auto_stop;
    if (x_variance) s.noise_variance = *x_variance;
    if (x_seed) s.seed = *x_seed;
    if (x_filter) s.filter = *x_filter;
    if (x_bandwidth) s.filter_bandwidth = *x_bandwidth;
    if (x_half_width) s.filter_half_width = *x_half_width;
    s.out_dir = out_dir.empty() ? fs::path("out") / id : fs::path(out_dir);
    const ExperimentResult result = run_experiment(s);
    std::cout << result.summary.dump(2) << '\n';
  }
};

// Names of the selected subcommand chain, outermost first.
std::vector<std::string> subcommand_path(const CLI::App& app) {
  std::vector<std::string> names;
  const CLI::App* node = &app;
  while (true) {
    const auto subs = node->get_subcommands();
    if (subs.empty()) break;
    node = subs.front();
    names.push_back(node->get_name());
  }
  return names;
}

int run(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  Cli cli;
  try {
    cli.app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.app.exit(e);
  }
  if (cli.config.empty()) {
    cli.action();
    return 0;
  }

  // Re-parse with config entries placed right after the subcommand names,
  // so explicit flags (which come later) win.
  const std::vector<std::string> extra = read_config(cli.config);
  std::vector<std::string> rest = args;
  std::vector<std::string> merged;
  auto from = rest.begin();
  for (const std::string& name : subcommand_path(cli.app)) {
    from = rest.erase(std::find(from, rest.end(), name));
    merged.push_back(name);
  }
  merged.insert(merged.end(), extra.begin(), extra.end());
  merged.insert(merged.end(), rest.begin(), rest.end());

  Cli second;
  std::vector<std::string> reversed(merged.rbegin(), merged.rend());
  second.app.parse(reversed);
  second.action();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  } catch (const FormatError& e) {
    return report_error(to_string(e.kind()), e.what(), kExitUsage);
  } catch (const Error& e) {
    return report_error(to_string(e.kind()), e.what(), kExitFailure);
  } catch (const json::exception& e) {
    return report_error("format", e.what(), kExitUsage);
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), kExitFailure);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitFailure);
  }
}
