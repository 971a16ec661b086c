#ifndef TRAX_RATIONAL_HPP
#define TRAX_RATIONAL_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "trax/common.hpp"

namespace trax {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat q(num, den);
  q.canonicalize();
  return q;
}

// Parses "p", "p/q" or a decimal string such as "-0.125" or "1e-3" exactly.
inline Rat rat_parse(const std::string& s) {
  if (s.empty()) throw MalformedError("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Rat q;
    if (q.set_str(s, 10) != 0) throw MalformedError("bad rational literal: " + s);
    q.canonicalize();
    return q;
  }
  std::string digits;
  long exp10 = 0;
  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');
  bool seen_dot = false, seen_digit = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '.') {
      if (seen_dot) throw MalformedError("bad decimal literal: " + s);
      seen_dot = true;
    } else if (c == 'e' || c == 'E') {
      exp10 = std::stol(s.substr(i + 1));
      break;
    } else if (c >= '0' && c <= '9') {
      digits.push_back(c);
      seen_digit = true;
      if (seen_dot) exp10 -= 1;
    } else {
      throw MalformedError("bad decimal literal: " + s);
    }
  }
  if (!seen_digit) throw MalformedError("bad decimal literal: " + s);
  Int mant(digits, 10);
  if (neg) mant = -mant;
  Rat q(mant);
  Int pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
  if (exp10 < 0)
    q /= Rat(pow);
  else
    q *= Rat(pow);
  q.canonicalize();
  return q;
}

// Fixed-precision decimal rendering, round-to-nearest.  Used for report files.
inline std::string rat_to_decimal(const Rat& q, int digits = 18) {
  Rat a = q >= 0 ? q : Rat(-q);
  Int pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  Int scaled_num = a.get_num() * pow * 2 + a.get_den();
  Int twice_den = a.get_den() * 2;
  Int scaled = scaled_num / twice_den;  // floor((a*pow)+1/2)
  std::string raw = scaled.get_str();
  if (static_cast<int>(raw.size()) <= digits)
    raw.insert(0, std::string(digits + 1 - raw.size(), '0'));
  std::string ip = raw.substr(0, raw.size() - digits);
  std::string fp = raw.substr(raw.size() - digits);
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  std::string out = (q < 0 ? "-" : "") + ip;
  if (!fp.empty()) out += "." + fp;
  return out;
}

inline std::string rat_to_string(const Rat& q) { return q.get_str(); }

inline double rat_to_double(const Rat& q) { return q.get_d(); }

inline double log_rat(const Rat& q) {
  // log of a positive rational with big operands: split into mantissa/exponent.
  if (q <= 0) throw Error("log of nonpositive rational");
  signed long en, ed;
  double dn = mpz_get_d_2exp(&en, q.get_num().get_mpz_t());
  double dd = mpz_get_d_2exp(&ed, q.get_den().get_mpz_t());
  return std::log(dn) - std::log(dd) + (static_cast<double>(en) - ed) * std::log(2.0);
}

}  // namespace trax

#endif
