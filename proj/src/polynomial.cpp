#include "polydeconv/polynomial.hpp"

#include <algorithm>
#include <string>

#include "polydeconv/errors.hpp"

namespace polydeconv {

Polynomial1D::Polynomial1D(std::vector<Real> coeffs) : coeffs_(std::move(coeffs)) {}

Polynomial1D::Polynomial1D(std::initializer_list<double> coeffs)
    : coeffs_(coeffs.begin(), coeffs.end()) {}

Polynomial1D Polynomial1D::from_doubles(std::span<const double> coeffs) {
  return Polynomial1D(std::vector<Real>(coeffs.begin(), coeffs.end()));
}

Polynomial1D Polynomial1D::monomial(int power, Real coeff) {
  if (power < 0) throw InvalidParameter("monomial power must be non-negative");
  std::vector<Real> c(static_cast<std::size_t>(power) + 1, Real(0));
  c.back() = std::move(coeff);
  return Polynomial1D(std::move(c));
}

Real Polynomial1D::max_abs_coeff() const {
  Real m(0);
  for (const Real& a : coeffs_) m = std::max(m, abs(a));
  return m;
}

int Polynomial1D::degree() const {
  const Real cutoff = max_abs_coeff() * kDegreeThreshold;
  for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 0; --k) {
    const Real& a = coeffs_[static_cast<std::size_t>(k)];
    if (a != 0 && abs(a) > cutoff) return k;
  }
  return -1;
}

int Polynomial1D::exact_degree() const {
  for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 0; --k) {
    if (coeffs_[static_cast<std::size_t>(k)] != 0) return k;
  }
  return -1;
}

std::vector<double> Polynomial1D::to_doubles() const {
  std::vector<double> out;
  out.reserve(coeffs_.size());
  for (const Real& a : coeffs_) out.push_back(to_double(a));
  return out;
}

Polynomial1D Polynomial1D::normalized() const {
  const int d = degree();
  return Polynomial1D(std::vector<Real>(coeffs_.begin(), coeffs_.begin() + (d + 1)));
}

Real Polynomial1D::eval(const Real& x) const {
  Real acc(0);
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial1D& Polynomial1D::operator+=(const Polynomial1D& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), Real(0));
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

Polynomial1D& Polynomial1D::operator-=(const Polynomial1D& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), Real(0));
  for (std::size_t k = 0; k < other.coeffs_.size(); ++k) coeffs_[k] -= other.coeffs_[k];
  return *this;
}

Polynomial1D& Polynomial1D::operator*=(const Real& scale) {
  for (Real& a : coeffs_) a *= scale;
  return *this;
}

double relative_coeff_error(const Polynomial1D& a, const Polynomial1D& reference) {
  const std::size_t n = std::max(a.size(), reference.size());
  Real worst(0);
  for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, abs(a.coeff(k) - reference.coeff(k)));
  const Real scale = reference.max_abs_coeff();
  if (scale == 0) return to_double(worst);
  return to_double(worst / scale);
}

// ---------------------------------------------------------------------------

ConvOperator::ConvOperator(Kernel kernel, double epsilon, int max_degree)
    : kernel_(std::move(kernel)), epsilon_(epsilon), max_degree_(max_degree) {
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
  if (max_degree < 0) throw InvalidParameter("max_degree must be non-negative");

  const std::size_t n = dim();
  // moments of phi_eps, with the sign of (x - y)^j expansion folded in
  std::vector<Real> shifted(n, Real(0));
  shifted[0] = Real(1);  // unit mass by construction
  const Real eps(epsilon);
  Real eps_power(1);
  for (int k = 1; k <= max_degree; ++k) {
    eps_power *= eps;
    const double c = kernel_.moment(k);
    if (c == 0.0) continue;
    Real value = Real(c) * eps_power;
    if (k % 2 == 1) value = -value;
    shifted[static_cast<std::size_t>(k)] = value;
  }

  matrix_.assign(n * n, Real(0));
  for (int j = 0; j <= max_degree; ++j) {
    Real binom(1);  // C(j, k), updated multiplicatively
    for (int k = 0; k <= j; ++k) {
      if (k > 0) {
        binom *= Real(j - k + 1);
        binom /= Real(k);
      }
      const Real& m = shifted[static_cast<std::size_t>(k)];
      if (m == 0) continue;
      matrix_[static_cast<std::size_t>(j - k) * n + static_cast<std::size_t>(j)] = binom * m;
    }
  }
}

Polynomial1D ConvOperator::apply(const Polynomial1D& p) const {
  const int d = p.exact_degree();
  if (d > max_degree_) {
    throw InvalidParameter("polynomial degree " + std::to_string(d) +
                           " exceeds operator max_degree " + std::to_string(max_degree_));
  }
  if (d < 0) return Polynomial1D();
  const std::size_t n = dim();
  const auto& a = p.coeffs();
  std::vector<Real> out(static_cast<std::size_t>(d) + 1, Real(0));
  for (int i = 0; i <= d; ++i) {
    Real acc(0);
    const Real* row = &matrix_[static_cast<std::size_t>(i) * n];
    for (int j = i; j <= d; ++j) {
      const Real& m = row[j];
      if (m != 0) acc += m * a[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = std::move(acc);
  }
  return Polynomial1D(std::move(out));
}

Polynomial1D convolve_poly(const ConvOperator& op, const Polynomial1D& p) {
  return op.apply(p);
}

Polynomial1D iterate(const ConvOperator& op, const Polynomial1D& p, int k) {
  if (k < 0) throw InvalidParameter("iterate count must be non-negative");
  if (p.exact_degree() > op.max_degree()) return op.apply(p);  // throws
  Polynomial1D current = p;
  for (int i = 0; i < k; ++i) current = op.apply(current);
  return current;
}

Polynomial1D side_polynomial(const ConvOperator& op, const Polynomial1D& p, int j) {
  if (j < 0) throw InvalidParameter("side polynomial index must be non-negative");
  if (p.is_zero()) throw InvalidParameter("side polynomials of the zero polynomial are undefined");
  if (j == 0) return p;
  if (p.degree() < 2) {
    throw InvalidParameter("side polynomials with j >= 1 need degree(p) >= 2");
  }

  // p_{i+1} = (T - id) p_i. Skipping the unit diagonal drops the leading
  // terms exactly instead of leaving rounding residue from a subtraction.
  if (p.exact_degree() > op.max_degree()) return op.apply(p);  // throws
  std::vector<Real> a(p.coeffs().begin(), p.coeffs().begin() + p.exact_degree() + 1);
  for (int step = 0; step < j && !a.empty(); ++step) {
    const std::size_t d = a.size() - 1;
    std::vector<Real> next(d, Real(0));
    for (std::size_t i = 0; i < d; ++i) {
      Real acc(0);
      for (std::size_t k = i + 1; k <= d; ++k) {
        const Real& m = op.entry(static_cast<int>(i), static_cast<int>(k));
        if (m != 0) acc += m * a[k];
      }
      next[i] = std::move(acc);
    }
    while (!next.empty() && next.back() == 0) next.pop_back();
    a = std::move(next);
  }
  return Polynomial1D(std::move(a)).normalized();
}

Polynomial1D invert_poly(const ConvOperator& op, const Polynomial1D& q) {
  if (!op.kernel().is_even()) {
    throw InvalidParameter("polynomial inversion requires an even kernel");
  }
  const int n = q.exact_degree();
  if (n > op.max_degree()) return op.apply(q);  // throws
  if (n < 0) return Polynomial1D();

  // sum_{j=0}^{m-1} (-1)^j C(m, j+1) T^j(q) with m = floor(n/2) + 1; each
  // step convolves the previous iterate once.
  const int m = n / 2 + 1;
  Polynomial1D current = q;
  Polynomial1D result = q * Real(m);
  Real binom(m);  // C(m, j+1)
  for (int j = 1; j < m; ++j) {
    current = op.apply(current);
    binom *= Real(m - j);
    binom /= Real(j + 1);
    result += current * ((j % 2 == 0) ? binom : Real(-binom));
  }
  return result;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const Polynomial1D& p) {
  nlohmann::json out = nlohmann::json::array();
  for (double a : p.to_doubles()) out.push_back(a);
  return out;
}

Polynomial1D polynomial_from_json(const nlohmann::json& j) {
  if (j.is_array()) {
    std::vector<Real> coeffs;
    coeffs.reserve(j.size());
    for (const auto& v : j) {
      if (!v.is_number()) throw FormatError("polynomial coefficient array must contain numbers");
      coeffs.emplace_back(v.get<double>());
    }
    return Polynomial1D(std::move(coeffs));
  }
  const MultiPolynomial mp = multipolynomial_from_json(j);
  if (mp.dim() != 1) {
    throw FormatError("expected a univariate polynomial, got dim " + std::to_string(mp.dim()));
  }
  std::vector<Real> coeffs(static_cast<std::size_t>(std::max(mp.total_degree(), -1) + 1), Real(0));
  for (const auto& [alpha, c] : mp.terms()) coeffs[static_cast<std::size_t>(alpha.e[0])] = c;
  return Polynomial1D(std::move(coeffs));
}

}  // namespace polydeconv
