#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"

#include "polydeconv/kernel.hpp"
#include "polydeconv/real.hpp"

namespace polydeconv {

/// Trailing coefficients below this fraction of max|a| do not count toward
/// the degree.
inline constexpr double kDegreeThreshold = 1e-14;

/// Dense power-basis polynomial a_0 + a_1 x + ... + a_n x^n.
class Polynomial1D {
 public:
  Polynomial1D() = default;
  explicit Polynomial1D(std::vector<Real> coeffs);
  Polynomial1D(std::initializer_list<double> coeffs);

  static Polynomial1D from_doubles(std::span<const double> coeffs);
  static Polynomial1D monomial(int power, Real coeff = Real(1));

  /// Largest k with |a_k| > kDegreeThreshold * max|a|; -1 for the zero polynomial.
  int degree() const;
  /// Largest k with a_k != 0 exactly; -1 for the zero polynomial.
  int exact_degree() const;
  bool is_zero() const { return exact_degree() < 0; }

  std::size_t size() const { return coeffs_.size(); }
  const std::vector<Real>& coeffs() const { return coeffs_; }
  /// a_k, or zero past the stored range.
  Real coeff(std::size_t k) const { return k < coeffs_.size() ? coeffs_[k] : Real(0); }
  std::vector<double> to_doubles() const;
  Real max_abs_coeff() const;

  /// Copy with trailing coefficients below the degree threshold removed.
  Polynomial1D normalized() const;

  Real eval(const Real& x) const;
  double operator()(double x) const { return to_double(eval(Real(x))); }

  Polynomial1D& operator+=(const Polynomial1D& other);
  Polynomial1D& operator-=(const Polynomial1D& other);
  Polynomial1D& operator*=(const Real& scale);

  friend Polynomial1D operator+(Polynomial1D a, const Polynomial1D& b) { return a += b; }
  friend Polynomial1D operator-(Polynomial1D a, const Polynomial1D& b) { return a -= b; }
  friend Polynomial1D operator*(Polynomial1D a, const Real& s) { return a *= s; }
  friend Polynomial1D operator*(const Real& s, Polynomial1D a) { return a *= s; }

 private:
  std::vector<Real> coeffs_;
};

/// max_k |a_k - b_k| / max_k |b_k|, with b the reference.
double relative_coeff_error(const Polynomial1D& a, const Polynomial1D& reference);

/// The convolution operator T_eps restricted to polynomials of degree
/// <= max_degree, materialized as the triangular matrix M with
/// M(i, j) = coefficient of x^i in T_eps(x^j) = C(j, j-i) (-1)^(j-i) c_(j-i) eps^(j-i).
///
/// For even kernels the diagonal is 1 and the first superdiagonal is 0, so the
/// two leading coefficients pass through unchanged.
class ConvOperator {
 public:
  ConvOperator(Kernel kernel, double epsilon, int max_degree);

  const Kernel& kernel() const { return kernel_; }
  double epsilon() const { return epsilon_; }
  int max_degree() const { return max_degree_; }
  const Real& entry(int row, int col) const {
    return matrix_[static_cast<std::size_t>(row) * dim() + static_cast<std::size_t>(col)];
  }

  /// Matrix-vector product M a. Throws InvalidParameter past max_degree.
  Polynomial1D apply(const Polynomial1D& p) const;

 private:
  std::size_t dim() const { return static_cast<std::size_t>(max_degree_) + 1; }

  Kernel kernel_;
  double epsilon_;
  int max_degree_;
  std::vector<Real> matrix_;  // row-major, (n+1) x (n+1)
};

/// T_eps(p).
Polynomial1D convolve_poly(const ConvOperator& op, const Polynomial1D& p);

/// T_eps^k(p) by k successive applications.
Polynomial1D iterate(const ConvOperator& op, const Polynomial1D& p, int k);

/// p_j = sum_k (-1)^k C(j, k) T^(j-k)(p) = (T - id)^j p, normalized.
/// Requires p != 0 and, for j >= 1, degree(p) >= 2.
Polynomial1D side_polynomial(const ConvOperator& op, const Polynomial1D& p, int j);

/// Exact inverse on P_n: sum_{j=0}^{n/2} (-1)^j C(n/2+1, j+1) T^j(q), where n
/// is the degree of q (floor(n/2) convolutions). Even kernels only.
Polynomial1D invert_poly(const ConvOperator& op, const Polynomial1D& q);

// ---------------------------------------------------------------------------
// Polynomials in up to three variables

/// Exponent vector; unused trailing components are zero.
struct MultiIndex {
  std::array<int, 3> e{0, 0, 0};

  int total() const { return e[0] + e[1] + e[2]; }
  auto operator<=>(const MultiIndex&) const = default;
};

class MultiPolynomial {
 public:
  explicit MultiPolynomial(int dim);
  static MultiPolynomial from_1d(const Polynomial1D& p);

  int dim() const { return dim_; }
  /// Adds coeff to a_alpha; alpha.size() must equal dim().
  void add_term(std::span<const int> alpha, const Real& coeff);
  void add_term(const MultiIndex& alpha, const Real& coeff);
  Real coeff(const MultiIndex& alpha) const;
  const std::map<MultiIndex, Real>& terms() const { return terms_; }

  /// Maximum |alpha| over nonzero terms; -1 when empty.
  int total_degree() const;
  Real max_abs_coeff() const;
  Real eval(std::span<const double> x) const;

  /// Drops exact zeros and entries below kDegreeThreshold * max|a|.
  MultiPolynomial normalized() const;

  MultiPolynomial& operator+=(const MultiPolynomial& other);
  MultiPolynomial& operator*=(const Real& scale);
  friend MultiPolynomial operator+(MultiPolynomial a, const MultiPolynomial& b) {
    return a += b;
  }
  friend MultiPolynomial operator*(const Real& s, MultiPolynomial a) { return a *= s; }

 private:
  int dim_;
  std::map<MultiIndex, Real> terms_;
};

/// max |a_alpha - b_alpha| / max |b_alpha| over the union of supports.
double relative_coeff_error(const MultiPolynomial& a, const MultiPolynomial& reference);

/// Convolution with the separable kernel phi(x_1) ... phi(x_d), whose
/// moments factor as c_alpha = prod_i c_(alpha_i).
MultiPolynomial convolve_multipoly(const Kernel& kernel, double epsilon,
                                   const MultiPolynomial& p);

/// Inverse of convolve_multipoly by the alternating sum over total degree.
MultiPolynomial invert_multipoly(const Kernel& kernel, double epsilon,
                                 const MultiPolynomial& q);

// ---------------------------------------------------------------------------
// JSON: {"dim": d, "terms": [{"alpha": [...], "coeff": r}, ...]} or, for
// d = 1, the plain array [a_0, ..., a_n].

nlohmann::json to_json(const Polynomial1D& p);
nlohmann::json to_json(const MultiPolynomial& p);
/// Accepts either layout; throws FormatError unless dim == 1.
Polynomial1D polynomial_from_json(const nlohmann::json& j);
MultiPolynomial multipolynomial_from_json(const nlohmann::json& j);

}  // namespace polydeconv
