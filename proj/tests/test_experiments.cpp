#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "polydeconv/errors.hpp"
#include "polydeconv/experiments.hpp"

using namespace polydeconv;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(POLYDECONV_TEST_TMP) / "experiments" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("taylor polynomial of sin 5x + sin 3x") {
  const Polynomial1D p = taylor_sin_mix(15);
  double factorial = 1.0;
  for (int k = 0; k <= 15; ++k) {
    if (k > 0) factorial *= k;
    const double expected = (std::pow(5.0, k) + std::pow(3.0, k)) * std::sin(k * std::numbers::pi / 2) / factorial;
    CAPTURE(k);
    const double got = to_double(p.coeff(static_cast<std::size_t>(k)));
    CHECK(std::abs(got - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
  const Polynomial1D high = taylor_sin_mix(50);
  for (double t : {-2.0, -0.3, 1.1, 2.0}) {
    CHECK(high(t) == doctest::Approx(std::sin(5 * t) + std::sin(3 * t)).epsilon(1e-12).scale(1.0));
  }
  CHECK_THROWS_AS(taylor_sin_mix(0), InvalidParameter);
}

TEST_CASE("defaults") {
  const ExperimentSpec f1 = ExperimentSpec::defaults("fig1");
  CHECK(f1.kernel == "bump");
  CHECK(f1.epsilon == 0.9);
  CHECK(f1.degree == 50);
  const ExperimentSpec f2 = ExperimentSpec::defaults("fig2");
  CHECK(f2.kernel == "gaussian");
  CHECK(f2.epsilon == 0.55);
  CHECK(f2.order == 90);
  const ExperimentSpec f3 = ExperimentSpec::defaults("fig3");
  CHECK(f3.noise_variance == 0.5);
  CHECK(f3.filter == "sinc");
  CHECK(f3.filter_bandwidth == 1.0);
  CHECK_THROWS_AS(ExperimentSpec::defaults("fig9"), InvalidParameter);
  ExperimentSpec bad = f2;
  bad.id = "other";
  CHECK_THROWS_AS(run_experiment(bad), InvalidParameter);
  // out_dir never leaks into the summary
  ExperimentSpec moved = f2;
  moved.out_dir = "/elsewhere";
  CHECK(moved.to_json() == f2.to_json());
}

TEST_CASE("polynomial experiment") {
  ExperimentSpec spec = ExperimentSpec::defaults("fig1");
  spec.out_dir = scratch("fig1");
  const ExperimentResult r = run_experiment(spec);
  const auto& res = r.summary["results"];
  CHECK(res["coefficient_roundtrip_error"].get<double>() < 1e-30);
  CHECK(res["pointwise_max_error"].get<double>() < 1e-30);
  CHECK(res["taylor_max_deviation"].get<double>() < 1e-12);
  CHECK(res["convolutions"] == 25 - 1);
  for (const auto& f : r.files) CHECK(std::filesystem::exists(spec.out_dir / f));
  CHECK(slurp(spec.out_dir / "polynomial.csv").rfind("t,p,conv,recovered,error\n", 0) == 0);
  CHECK(r.summary["grid_reconstructed"] == true);

  SUBCASE("an affine polynomial needs no correction") {
    spec.degree = 1;
    spec.out_dir = scratch("fig1_affine");
    const ExperimentResult a = run_experiment(spec);
    CHECK(a.summary["results"]["coefficient_roundtrip_error"] == 0.0);
    CHECK(a.summary["results"]["pointwise_max_error"] == 0.0);
  }
}

TEST_CASE("noise-free filtered run with an allpass filter repeats the plain run") {
  ExperimentSpec plain = ExperimentSpec::defaults("fig2");
  plain.samples = 1024;
  plain.order = 30;
  plain.out_dir = scratch("plain");
  ExperimentSpec noisy = ExperimentSpec::defaults("fig3");
  noisy.samples = 1024;
  noisy.order = 30;
  noisy.noise_variance = 0.0;
  noisy.filter = "allpass";
  noisy.out_dir = scratch("allpass");
  const ExperimentResult a = run_experiment(plain);
  const ExperimentResult b = run_experiment(noisy);
  CHECK(slurp(plain.out_dir / "reconstruction.csv") == slurp(noisy.out_dir / "reconstruction.csv"));
  CHECK(b.summary["results"]["snr"].is_null());
  CHECK(b.summary["results"]["interior_error_filtered"] == a.summary["results"]["interior_error"]);
  CHECK(b.summary["results"]["filter_dc_gain"] == 1.0);

  noisy.filter = "boxcar";
  CHECK_THROWS_AS(run_experiment(noisy), InvalidParameter);
}

TEST_CASE("peak helpers") {
  // cos at 3 rad/s on a grid where omega / (2 pi df) is not an integer
  const double dt = 0.01;
  const std::size_t n = 1000;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(3.0 * static_cast<double>(i) * dt);
  const Spectrum sp = dft(GridSignal(0.0, dt, v));
  const double kappa = 3.0 / (kTwoPi * sp.df);
  const std::size_t k = peak_bin(sp, 3.0);
  CHECK((k == static_cast<std::size_t>(std::floor(kappa)) || k == static_cast<std::size_t>(std::ceil(kappa))));
  CHECK(std::abs(sp.bins[k]) >= std::abs(sp.bins[static_cast<std::size_t>(std::floor(kappa))]));
  CHECK(std::abs(sp.bins[k]) >= std::abs(sp.bins[static_cast<std::size_t>(std::ceil(kappa))]));
  CHECK_THROWS_AS(peak_bin(sp, 1e4), InvalidParameter);

  // flat spectrum of ones with a few spikes: the floor is 1
  Spectrum flat;
  flat.df = 0.1;
  flat.bins.assign(200, 1.0);
  flat.bins[40] = 50.0;
  flat.bins[41] = 20.0;
  flat.bins[45] = 30.0;
  flat.bins[160] = 50.0;  // mirrored bin, ignored
  CHECK(local_noise_floor(flat, 40, {40, 45}) == 1.0);
  // the window keeps bins with |2 pi df (k - 40)| <= 2, i.e. k in 37..43
  flat.bins[37] = 3.0;
  flat.bins[43] = 3.0;
  flat.bins[38] = 3.0;
  // 37, 38, 42, 43 remain after excluding 39..41 and 44..46: magnitudes 3, 3, 1, 3
  CHECK(local_noise_floor(flat, 40, {40, 45}) == 3.0);
  CHECK_THROWS_AS(local_noise_floor(flat, 40, {40, 45}, 0.1), InvalidParameter);
}

}
