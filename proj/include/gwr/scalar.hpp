#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <gmpxx.h>

namespace gwr {

// Error codes mirror the failure modes of the public operations; every
// throw site in the library uses gwr::error so callers can dispatch on code.
enum class errc {
  disconnected_k,
  self_loop,
  duplicate_edge,
  unknown_joint,
  non_summable_pair,
  asymmetric_input,
  rational_backend_unsupported,
  division_by_zero_constant_term,
  order_exceeds_cap,
  not_positive_definite,
  not_finitely_supported,
  non_unitary_u,
  non_symmetric_u,
  dependent_columns,
  tail_degree_too_high,
  leading_not_invertible,
  consistency_violation,
  singular_solve,
  cutoff_too_small,
  precondition_moment_nonzero,
  parse_error,
  unknown_field,
  invalid_fraction,
  io_error,
  bad_argument,
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

// Exact rational scalar backed by GMP.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

// Parses "p", "-p/q" or a plain integer literal; exact, no floats involved.
inline Rational parse_rational(const std::string& text) {
  if (text.empty()) fail(errc::invalid_fraction, "empty fraction literal");
  for (char c : text) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '/'))
      fail(errc::invalid_fraction, "bad fraction literal: " + text);
  }
  try {
    Rational q(text);
    if (q.get_den() == 0) fail(errc::invalid_fraction, "zero denominator: " + text);
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    fail(errc::invalid_fraction, "bad fraction literal: " + text);
  }
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

// Scalar backend traits. Rational is exact; double carries a relative
// rank tolerance that every rank decision must respect.
template <class S>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static bool is_zero(const Rational& x, const Rational& /*scale*/, double /*tol*/) {
    return x == 0;
  }
  static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational from_rational(const Rational& x) { return x; }
};

template <>
struct scalar_traits<double> {
  static constexpr bool exact = false;
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool is_zero(double x, double scale, double tol) {
    double s = std::abs(scale);
    if (s < 1.0) s = 1.0;
    return std::abs(x) <= tol * s;
  }
  static double abs(double x) { return std::abs(x); }
  static double to_double(double x) { return x; }
  static double from_rational(const Rational& x) { return x.get_d(); }
};

template <class S>
inline S scalar_from_rational(const Rational& x) {
  return scalar_traits<S>::from_rational(x);
}

constexpr double kDefaultRankTol = 1e-9;

}  // namespace gwr
