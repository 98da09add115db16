#pragma once

// Rationals of (0,1) in Calkin-Wilf order: r_1 = 1/2, r_2 = 1/3, r_3 = 2/3,
// r_4 = 1/4, r_5 = 3/5, ... Position n corresponds to node 2n of the
// Calkin-Wilf tree, so indices grow exponentially with depth and are kept as
// arbitrary-precision integers.

#include <cstdint>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace molab {

using BigInt = boost::multiprecision::cpp_int;

struct Rational {
  BigInt num;
  BigInt den;

  double value() const;
  /// Largest double <= num/den.
  double round_down() const;
  /// Smallest double >= num/den.
  double round_up() const;
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// n-th rational of (0,1), n >= 1.
Rational unit_rational(const BigInt& n);
/// Inverse of unit_rational; throws unless 0 < r < 1 in lowest terms.
BigInt unit_rational_index(const Rational& r);

/// Sequential enumerator (Newman's successor formula), used as an
/// independent cross-check of the tree-path construction.
class UnitRationalSequence {
 public:
  /// Advances to the next rational in (0,1) and returns it.
  Rational next();

 private:
  BigInt p_ = 1, q_ = 1;  // current element of the full Calkin-Wilf sequence
};

/// The rational of least Calkin-Wilf index in the open interval (a, b),
/// 0 <= a < b <= 1. It is the unique rational of minimal Stern-Brocot depth
/// there, found by continued-fraction descent on the exact endpoints.
Rational least_index_rational(double a, double b);

}  // namespace molab
