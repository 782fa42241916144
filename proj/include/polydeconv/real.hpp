#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace polydeconv {

/// Extended-precision scalar used for polynomial coefficients.
///
/// Convolution with a wide kernel spreads a degree-n polynomial over a huge
/// dynamic range: for the Gaussian at eps = 1.5 and n = 50 the constant term of
/// T(x^50) is about 1e48, and the alternating inverse sums pass through
/// intermediates near 1e90. Recovering O(1) coefficients from that requires
/// roughly 110 significant decimal digits.
using Real = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<120>,
    boost::multiprecision::et_off>;

inline double to_double(const Real& r) { return r.convert_to<double>(); }

/// C(n, k) by the multiplicative recurrence. Exact for every n used here when
/// T is Real; within a few ulp for double.
template <typename T = double>
T binomial(int n, int k) {
  if (k < 0 || k > n) return T(0);
  if (k > n - k) k = n - k;
  T c(1);
  for (int i = 0; i < k; ++i) {
    c *= T(n - i);
    c /= T(i + 1);
  }
  return c;
}

}  // namespace polydeconv
