#include "molab/rational.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "molab/error.hpp"

namespace molab {

namespace {

using Exact = boost::multiprecision::cpp_rational;

Exact exact(const Rational& r) { return Exact(r.num, r.den); }

Exact exact(double v) {
  // Doubles are dyadic rationals; decompose without rounding.
  int e = 0;
  double m = std::frexp(v, &e);
  auto mant = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  Exact out(mant);
  if (e > 0) {
    out *= Exact(BigInt(1) << e);
  } else if (e < 0) {
    out /= Exact(BigInt(1) << -e);
  }
  return out;
}

Rational make(const Exact& q) { return Rational{numerator(q), denominator(q)}; }

// Simplest rational strictly between lo and hi (hi may be +inf), lo >= 0.
Exact simplest_between(const Exact& lo, const Exact* hi) {
  BigInt fl = numerator(lo) / denominator(lo);
  Exact cand(fl + 1);
  if (!hi || cand < *hi) return cand;
  // Both endpoints lie in [fl, fl+1]; write x = fl + 1/y and recurse on y.
  Exact lo_frac = lo - Exact(fl);
  Exact new_lo = Exact(1) / (*hi - Exact(fl));
  if (lo_frac == 0) return Exact(fl) + Exact(1) / simplest_between(new_lo, nullptr);
  Exact new_hi = Exact(1) / lo_frac;
  return Exact(fl) + Exact(1) / simplest_between(new_lo, &new_hi);
}

}  // namespace

double Rational::value() const { return static_cast<double>(exact(*this)); }

double Rational::round_down() const {
  Exact q = exact(*this);
  double d = static_cast<double>(q);
  while (exact(d) > q) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  while (true) {
    double up = std::nextafter(d, std::numeric_limits<double>::infinity());
    if (exact(up) <= q) {
      d = up;
    } else {
      break;
    }
  }
  return d;
}

double Rational::round_up() const {
  Exact q = exact(*this);
  double d = static_cast<double>(q);
  while (exact(d) < q) d = std::nextafter(d, std::numeric_limits<double>::infinity());
  while (true) {
    double down = std::nextafter(d, -std::numeric_limits<double>::infinity());
    if (exact(down) >= q) {
      d = down;
    } else {
      break;
    }
  }
  return d;
}

std::string Rational::str() const { return num.str() + "/" + den.str(); }

Rational unit_rational(const BigInt& n) {
  if (n < 1) throw PreconditionError("rational index must be >= 1", "n");
  BigInt node = n << 1;
  std::size_t bits = msb(node);
  BigInt a = 1, b = 1;
  for (std::size_t i = bits; i-- > 0;) {
    if (bit_test(node, static_cast<unsigned>(i))) {
      a = a + b;
    } else {
      b = a + b;
    }
  }
  return Rational{a, b};
}

BigInt unit_rational_index(const Rational& r) {
  if (r.num <= 0 || r.num >= r.den || gcd(r.num, r.den) != 1)
    throw PreconditionError("expected a reduced rational in (0,1)", "rational");
  // Walk to the root, recording runs of identical path bits (leaf first).
  std::vector<std::pair<bool, BigInt>> runs;
  BigInt p = r.num, q = r.den;
  while (!(p == 1 && q == 1)) {
    if (p < q) {
      BigInt k = (q - 1) / p;
      q -= k * p;
      runs.emplace_back(false, k);
    } else {
      BigInt k = (p - 1) / q;
      p -= k * q;
      runs.emplace_back(true, k);
    }
  }
  BigInt node = 1;
  for (auto it = runs.rbegin(); it != runs.rend(); ++it) {
    auto k = static_cast<unsigned>(it->second);
    node <<= k;
    if (it->first) node |= (BigInt(1) << k) - 1;
  }
  return node >> 1;
}

Rational UnitRationalSequence::next() {
  while (true) {
    // x' = 1 / (2 floor(x) - x + 1) with x = p/q.
    BigInt fl = p_ / q_;
    BigInt np = q_;
    BigInt nq = (2 * fl + 1) * q_ - p_;
    p_ = np;
    q_ = nq;
    if (p_ < q_) return Rational{p_, q_};
  }
}

Rational least_index_rational(double a, double b) {
  if (!(0.0 <= a && a < b && b <= 1.0))
    throw PreconditionError("least_index_rational needs 0 <= a < b <= 1", "interval");
  Exact lo = exact(a), hi = exact(b);
  return make(simplest_between(lo, &hi));
}

}  // namespace molab
