#include <algorithm>
#include <string>

#include "polydeconv/errors.hpp"
#include "polydeconv/polynomial.hpp"

namespace polydeconv {

namespace {

void require_dim(int dim) {
  if (dim < 1 || dim > 3) {
    throw InvalidParameter("polynomial dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
}

// c_k eps^k for k = 0..max_power, with c_0 = 1 exactly.
std::vector<Real> scaled_moments(const Kernel& kernel, double epsilon, int max_power) {
  std::vector<Real> out(static_cast<std::size_t>(max_power) + 1, Real(0));
  out[0] = Real(1);
  Real eps_power(1);
  for (int k = 1; k <= max_power; ++k) {
    eps_power *= Real(epsilon);
    const double c = kernel.moment(k);
    if (c != 0.0) out[static_cast<std::size_t>(k)] = Real(c) * eps_power;
  }
  return out;
}

void require_even_kernel(const Kernel& kernel, double epsilon) {
  if (!kernel.is_even()) {
    throw InvalidParameter("multivariate convolution requires an even separable kernel");
  }
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be positive");
}

// One application of T_eps given the precomputed 1-D moment table.
MultiPolynomial apply_separable(const std::vector<Real>& moments, const MultiPolynomial& p) {
  MultiPolynomial out(p.dim());
  const int d = p.dim();
  for (const auto& [alpha, a] : p.terms()) {
    if (a == 0) continue;
    // enumerate gamma <= alpha with even components (odd moments vanish)
    MultiIndex gamma;
    while (true) {
      Real weight = a;
      MultiIndex beta;
      for (int i = 0; i < d; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        weight *= binomial<Real>(alpha.e[idx], gamma.e[idx]) *
                  moments[static_cast<std::size_t>(gamma.e[idx])];
        beta.e[idx] = alpha.e[idx] - gamma.e[idx];
      }
      if (weight != 0) out.add_term(beta, weight);

      int i = 0;
      for (; i < d; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        gamma.e[idx] += 2;
        if (gamma.e[idx] <= alpha.e[idx]) break;
        gamma.e[idx] = 0;
      }
      if (i == d) break;
    }
  }
  return out;
}

}  // namespace

MultiPolynomial::MultiPolynomial(int dim) : dim_(dim) { require_dim(dim); }

MultiPolynomial MultiPolynomial::from_1d(const Polynomial1D& p) {
  MultiPolynomial out(1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p.coeffs()[k] != 0) out.add_term(MultiIndex{{static_cast<int>(k), 0, 0}}, p.coeffs()[k]);
  }
  return out;
}

void MultiPolynomial::add_term(std::span<const int> alpha, const Real& coeff) {
  if (static_cast<int>(alpha.size()) != dim_) {
    throw InvalidParameter("multi-index length " + std::to_string(alpha.size()) +
                           " does not match dimension " + std::to_string(dim_));
  }
  MultiIndex index;
  for (std::size_t i = 0; i < alpha.size(); ++i) index.e[i] = alpha[i];
  add_term(index, coeff);
}

void MultiPolynomial::add_term(const MultiIndex& alpha, const Real& coeff) {
  for (int i = 0; i < 3; ++i) {
    const int e = alpha.e[static_cast<std::size_t>(i)];
    if (e < 0 || (i >= dim_ && e != 0)) {
      throw InvalidParameter("invalid multi-index for dimension " + std::to_string(dim_));
    }
  }
  auto [it, inserted] = terms_.try_emplace(alpha, coeff);
  if (!inserted) it->second += coeff;
  if (it->second == 0) terms_.erase(it);
}

Real MultiPolynomial::coeff(const MultiIndex& alpha) const {
  const auto it = terms_.find(alpha);
  return it == terms_.end() ? Real(0) : it->second;
}

int MultiPolynomial::total_degree() const {
  int d = -1;
  for (const auto& [alpha, a] : terms_) {
    if (a != 0) d = std::max(d, alpha.total());
  }
  return d;
}

Real MultiPolynomial::max_abs_coeff() const {
  Real m(0);
  for (const auto& [alpha, a] : terms_) m = std::max(m, abs(a));
  return m;
}

Real MultiPolynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw InvalidParameter("point dimension mismatch");
  Real sum(0);
  for (const auto& [alpha, a] : terms_) {
    Real term = a;
    for (int i = 0; i < dim_; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      term *= pow(Real(x[idx]), alpha.e[idx]);
    }
    sum += term;
  }
  return sum;
}

MultiPolynomial MultiPolynomial::normalized() const {
  // Same rule as the univariate case: strip the highest total degrees while
  // every coefficient there is below the threshold.
  const Real cutoff = max_abs_coeff() * kDegreeThreshold;
  int keep = -1;
  for (const auto& [alpha, a] : terms_) {
    if (a != 0 && abs(a) > cutoff) keep = std::max(keep, alpha.total());
  }
  MultiPolynomial out(dim_);
  for (const auto& [alpha, a] : terms_) {
    if (a != 0 && alpha.total() <= keep) out.terms_.emplace(alpha, a);
  }
  return out;
}

MultiPolynomial& MultiPolynomial::operator+=(const MultiPolynomial& other) {
  if (other.dim_ != dim_) throw InvalidParameter("cannot add polynomials of different dimension");
  for (const auto& [alpha, a] : other.terms_) add_term(alpha, a);
  return *this;
}

MultiPolynomial& MultiPolynomial::operator*=(const Real& scale) {
  if (scale == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, a] : terms_) a *= scale;
  return *this;
}

double relative_coeff_error(const MultiPolynomial& a, const MultiPolynomial& reference) {
  Real worst(0);
  for (const auto& [alpha, c] : a.terms()) worst = std::max(worst, abs(c - reference.coeff(alpha)));
  for (const auto& [alpha, c] : reference.terms()) {
    worst = std::max(worst, abs(a.coeff(alpha) - c));
  }
  const Real scale = reference.max_abs_coeff();
  return to_double(scale == 0 ? worst : worst / scale);
}

MultiPolynomial convolve_multipoly(const Kernel& kernel, double epsilon,
                                   const MultiPolynomial& p) {
  require_even_kernel(kernel, epsilon);
  const int n = p.total_degree();
  if (n < 0) return MultiPolynomial(p.dim());
  return apply_separable(scaled_moments(kernel, epsilon, n), p);
}

MultiPolynomial invert_multipoly(const Kernel& kernel, double epsilon,
                                 const MultiPolynomial& q) {
  require_even_kernel(kernel, epsilon);
  const int n = q.total_degree();
  if (n < 0) return MultiPolynomial(q.dim());

  const std::vector<Real> moments = scaled_moments(kernel, epsilon, n);
  const int m = n / 2 + 1;
  MultiPolynomial current = q;
  MultiPolynomial result = Real(m) * q;
  Real binom(m);  // C(m, j+1)
  for (int j = 1; j < m; ++j) {
    current = apply_separable(moments, current);
    binom *= Real(m - j);
    binom /= Real(j + 1);
    result += ((j % 2 == 0) ? binom : Real(-binom)) * current;
  }
  return result.normalized();
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const MultiPolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [alpha, a] : p.terms()) {
    nlohmann::json index = nlohmann::json::array();
    for (int i = 0; i < p.dim(); ++i) index.push_back(alpha.e[static_cast<std::size_t>(i)]);
    terms.push_back({{"alpha", index}, {"coeff", to_double(a)}});
  }
  return {{"dim", p.dim()}, {"terms", terms}};
}

MultiPolynomial multipolynomial_from_json(const nlohmann::json& j) {
  if (j.is_array()) return MultiPolynomial::from_1d(polynomial_from_json(j));
  if (!j.is_object() || !j.contains("dim") || !j.contains("terms")) {
    throw FormatError("polynomial JSON must be an array or an object with 'dim' and 'terms'");
  }
  if (!j["dim"].is_number_integer()) throw FormatError("'dim' must be an integer");
  const int dim = j["dim"].get<int>();
  if (dim < 1 || dim > 3) throw FormatError("'dim' must be 1, 2 or 3");
  if (!j["terms"].is_array()) throw FormatError("'terms' must be an array");

  MultiPolynomial out(dim);
  for (const auto& term : j["terms"]) {
    if (!term.is_object() || !term.contains("alpha") || !term.contains("coeff")) {
      throw FormatError("each term needs 'alpha' and 'coeff'");
    }
    const auto& alpha = term["alpha"];
    if (!alpha.is_array() || static_cast<int>(alpha.size()) != dim) {
      throw FormatError("'alpha' must be an array of length dim");
    }
    if (!term["coeff"].is_number()) throw FormatError("'coeff' must be a number");
    std::vector<int> index;
    for (const auto& e : alpha) {
      if (!e.is_number_integer() || e.get<int>() < 0) {
        throw FormatError("'alpha' entries must be non-negative integers");
      }
      index.push_back(e.get<int>());
    }
    out.add_term(index, Real(term["coeff"].get<double>()));
  }
  return out;
}

}  // namespace polydeconv
