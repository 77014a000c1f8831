#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "mdag/error.hpp"
#include "mdag/time.hpp"

namespace mdag {

/// Exact rational arithmetic for utilizations, beta and bucket widths.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Accepts "3", "1.25", "0.05" and "3/2".
inline Rational parse_rational(std::string_view text) {
  auto fail = [&] { return Error(ErrorKind::Parse, "invalid rational '" + std::string(text) + "'"); };
  if (text.empty()) throw fail();

  auto parse_int = [&](std::string_view s) {
    if (s.empty() || s.size() > 30) throw fail();
    BigInt v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw fail();
      v = v * 10 + (c - '0');
    }
    return v;
  };

  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt den = parse_int(text.substr(slash + 1));
    if (den == 0) throw fail();
    r = Rational(parse_int(text.substr(0, slash)), den);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw fail();
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
    BigInt w = whole.empty() ? BigInt(0) : parse_int(whole);
    BigInt f = frac.empty() ? BigInt(0) : parse_int(frac);
    r = Rational(w * scale + f, scale);
  } else {
    r = Rational(parse_int(text));
  }
  return negative ? Rational(-r) : r;
}

inline BigInt floor(const Rational& r) {
  BigInt n = numerator(r);
  BigInt d = denominator(r);
  BigInt q = n / d;
  if (n % d != 0 && n < 0) q -= 1;
  return q;
}

inline BigInt ceil(const Rational& r) { return -floor(Rational(-r)); }

/// Nearest integer, halves rounded up.
inline BigInt round_half_up(const Rational& r) { return floor(r + Rational(1, 2)); }

/// Fixed-point rendering, rounded half up at the last printed digit.
inline std::string to_fixed(const Rational& r, unsigned decimals) {
  BigInt scale = boost::multiprecision::pow(BigInt(10), decimals);
  BigInt scaled = round_half_up(r * scale);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string digits = scaled.str();
  if (digits.size() <= decimals) digits.insert(0, decimals + 1 - digits.size(), '0');
  std::string out = negative ? "-" : "";
  out += digits.substr(0, digits.size() - decimals);
  if (decimals > 0) out += "." + digits.substr(digits.size() - decimals);
  return out;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Time to_time(const BigInt& v) {
  if (v > std::numeric_limits<Time>::max() || v < std::numeric_limits<Time>::min()) {
    throw Error(ErrorKind::Overflow, "value does not fit in a time: " + v.str());
  }
  return v.convert_to<Time>();
}

}  // namespace mdag
