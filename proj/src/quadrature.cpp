#include "polydeconv/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "polydeconv/errors.hpp"

namespace polydeconv {

namespace {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

Segment gauss_kronrod_15(const std::function<double(double)>& f, double a,
                         double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& options) {
  QuadratureResult result;
  if (a == b) {
    result.converged = true;
    return result;
  }
  if (a > b) {
    result = integrate(f, b, a, options);
    result.value = -result.value;
    return result;
  }
  std::priority_queue<Segment> heap;
  heap.push(gauss_kronrod_15(f, a, b));
  result.evaluations = 15;

  double total = heap.top().value;
  double error = heap.top().error;
  while (true) {
    const double tolerance =
        std::max(options.abs_tol, options.rel_tol * std::abs(total));
    if (error <= tolerance) {
      result.converged = true;
      break;
    }
    if (result.subdivisions >= options.max_subdivisions) break;

    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      // interval cannot be split further in double precision
      heap.push(worst);
      break;
    }
    const Segment left = gauss_kronrod_15(f, worst.a, mid);
    const Segment right = gauss_kronrod_15(f, mid, worst.b);
    result.evaluations += 30;
    ++result.subdivisions;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from scratch; the running totals drift after many updates.
  result.value = 0.0;
  result.abs_error = 0.0;
  std::vector<Segment> segments;
  while (!heap.empty()) {
    segments.push_back(heap.top());
    heap.pop();
  }
  for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
    result.value += it->value;
    result.abs_error += it->error;
  }
  if (!std::isfinite(result.value)) result.converged = false;
  return result;
}

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& options) {
  const QuadratureResult r = integrate(f, a, b, options);
  if (!r.converged) {
    std::ostringstream msg;
    msg << "quadrature on [" << a << ", " << b
        << "] did not converge: estimated error " << r.abs_error << " after "
        << r.subdivisions << " subdivisions";
    throw PrecisionError(msg.str(), r.abs_error);
  }
  return r.value;
}

}  // namespace polydeconv
