#ifndef TRAX_LINALG_HPP
#define TRAX_LINALG_HPP

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "trax/rational.hpp"

namespace trax {

using RatVec = std::vector<Rat>;
using RatMat = std::vector<RatVec>;  // row-major

inline RatMat rat_identity(std::size_t n) {
  RatMat m(n, RatVec(n, Rat(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

// In-place reduced row echelon form; returns pivot column per pivot row.
inline std::vector<std::size_t> rref(RatMat& m) {
  std::vector<std::size_t> pivots;
  if (m.empty()) return pivots;
  std::size_t rows = m.size(), cols = m[0].size(), r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t sel = rows;
    for (std::size_t i = r; i < rows; ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel == rows) continue;
    std::swap(m[r], m[sel]);
    Rat inv = m[r][c];
    for (std::size_t j = c; j < cols; ++j) m[r][j] /= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      Rat f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t rank(RatMat m) { return rref(m).size(); }

// Basis of {x : Ax = 0}, one column-vector per free column of A.
inline std::vector<RatVec> kernel_basis(RatMat a) {
  if (a.empty()) return {};
  std::size_t cols = a[0].size();
  auto pivots = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<RatVec> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    RatVec v(cols, Rat(0));
    v[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][f];
    basis.push_back(std::move(v));
  }
  return basis;
}

// Solves Ax = b exactly; empty optional when inconsistent.  Free variables
// are set to zero.
inline std::optional<RatVec> solve(RatMat a, RatVec b) {
  std::size_t rows = a.size();
  std::size_t cols = rows ? a[0].size() : 0;
  for (std::size_t i = 0; i < rows; ++i) a[i].push_back(b[i]);
  auto pivots = rref(a);
  RatVec x(cols, Rat(0));
  for (std::size_t r = 0; r < a.size(); ++r) {
    bool all_zero = true;
    for (std::size_t c = 0; c < cols; ++c)
      if (a[r][c] != 0) {
        all_zero = false;
        break;
      }
    if (all_zero && a[r][cols] != 0) return std::nullopt;
  }
  for (std::size_t r = 0; r < pivots.size(); ++r)
    if (pivots[r] < cols) x[pivots[r]] = a[r][cols];
  return x;
}

inline Rat rat_det(RatMat m) {
  std::size_t n = m.size();
  Rat det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t sel = n;
    for (std::size_t i = c; i < n; ++i)
      if (m[i][c] != 0) {
        sel = i;
        break;
      }
    if (sel == n) return Rat(0);
    if (sel != c) {
      std::swap(m[sel], m[c]);
      det = -det;
    }
    det *= m[c][c];
    Rat inv = m[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m[i][c] == 0) continue;
      Rat f = m[i][c] / inv;
      for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  return det;
}

// Dense square big-integer matrix, the carrier for carrying maps.
struct IntMatrix {
  std::size_t n = 0;
  std::vector<Int> a;  // row-major

  IntMatrix() = default;
  explicit IntMatrix(std::size_t n_) : n(n_), a(n_ * n_, Int(0)) {}

  static IntMatrix identity(std::size_t n_) {
    IntMatrix m(n_);
    for (std::size_t i = 0; i < n_; ++i) m.at(i, i) = 1;
    return m;
  }

  Int& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  const Int& at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  bool operator==(const IntMatrix& o) const { return n == o.n && a == o.a; }

  IntMatrix operator*(const IntMatrix& o) const {
    IntMatrix r(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Int& f = at(i, k);
        if (f == 0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          if (o.at(k, j) == 0) continue;
          mpz_addmul(r.at(i, j).get_mpz_t(), f.get_mpz_t(), o.at(k, j).get_mpz_t());
        }
      }
    return r;
  }

  std::vector<Int> apply(const std::vector<Int>& v) const {
    std::vector<Int> r(n, Int(0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (at(i, j) == 0) continue;
        mpz_addmul(r[i].get_mpz_t(), at(i, j).get_mpz_t(), v[j].get_mpz_t());
      }
    return r;
  }

  RatVec apply(const RatVec& v) const {
    RatVec r(n, Rat(0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (at(i, j) != 0) r[i] += Rat(at(i, j)) * v[j];
    return r;
  }

  IntMatrix transpose() const {
    IntMatrix r(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  Rat det() const {
    RatMat m(n, RatVec(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i][j] = Rat(at(i, j));
    return rat_det(std::move(m));
  }

  bool all_positive() const {
    for (const auto& x : a)
      if (x <= 0) return false;
    return true;
  }
};

// Boolean support pattern of a square matrix; used for primitivity tests
// and tight-word search.
struct BoolMatrix {
  std::size_t n = 0;
  std::vector<uint32_t> rows;  // n <= 32 is plenty here

  BoolMatrix() = default;
  explicit BoolMatrix(std::size_t n_) : n(n_), rows(n_, 0) {}

  static BoolMatrix identity(std::size_t n_) {
    BoolMatrix m(n_);
    for (std::size_t i = 0; i < n_; ++i) m.rows[i] = uint32_t{1} << i;
    return m;
  }
  static BoolMatrix from(const IntMatrix& m) {
    BoolMatrix r(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
      for (std::size_t j = 0; j < m.n; ++j)
        if (m.at(i, j) > 0) r.rows[i] |= uint32_t{1} << j;
    return r;
  }

  bool get(std::size_t i, std::size_t j) const { return (rows[i] >> j) & 1; }

  BoolMatrix operator*(const BoolMatrix& o) const {
    BoolMatrix r(n);
    for (std::size_t i = 0; i < n; ++i) {
      uint32_t acc = 0, row = rows[i];
      while (row) {
        std::size_t k = static_cast<std::size_t>(__builtin_ctz(row));
        row &= row - 1;
        acc |= o.rows[k];
      }
      r.rows[i] = acc;
    }
    return r;
  }

  bool all_true() const {
    uint32_t full = (n == 32) ? ~uint32_t{0} : ((uint32_t{1} << n) - 1);
    for (auto r : rows)
      if ((r & full) != full) return false;
    return true;
  }

  bool operator==(const BoolMatrix& o) const { return n == o.n && rows == o.rows; }
};

// True when some power of the pattern is entrywise positive.
inline bool is_primitive_pattern(BoolMatrix m) {
  // Wielandt bound (n-1)^2 + 1 caps the exponent to test.
  std::size_t limit = (m.n - 1) * (m.n - 1) + 2;
  BoolMatrix p = m;
  for (std::size_t k = 1; k <= limit; ++k) {
    if (p.all_true()) return true;
    p = p * m;
  }
  return p.all_true();
}

// --- exact LP feasibility -------------------------------------------------
//
// Phase-1 simplex with Bland's rule over the rationals.  We only ever need
// feasibility of {Ax = b, x >= 0}; the cone questions in this project reduce
// to that form.
inline bool lp_feasible(RatMat a, RatVec b) {
  std::size_t m = a.size();
  if (m == 0) return true;
  std::size_t n = a[0].size();
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0) {
      for (auto& x : a[i]) x = -x;
      b[i] = -b[i];
    }
  // tableau over variables x_0..x_{n-1}, artificials x_n..x_{n+m-1}
  std::size_t total = n + m;
  RatMat t(m, RatVec(total + 1, Rat(0)));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1;
    t[i][total] = b[i];
    basis[i] = n + i;
  }
  // minimize w = sum of artificials; obj holds the negated reduced costs of
  // -w, with zeros at the (basic) artificial columns
  RatVec obj(total + 1, Rat(0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) obj[j] -= t[i][j];
    obj[total] -= t[i][total];
  }
  while (true) {
    std::size_t enter = total;
    for (std::size_t j = 0; j < total; ++j)
      if (obj[j] < 0) {  // Bland: first improving column
        enter = j;
        break;
      }
    if (enter == total) break;
    std::size_t leave = m;
    Rat best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rat ratio = t[i][total] / t[i][enter];
      if (leave == m || ratio < best ||
          (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) break;  // unbounded direction; phase-1 objective stays >= 0
    Rat piv = t[leave][enter];
    for (auto& x : t[leave]) x /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      Rat f = t[i][enter];
      for (std::size_t j = 0; j <= total; ++j) t[i][j] -= f * t[leave][j];
    }
    Rat f = obj[enter];
    if (f != 0)
      for (std::size_t j = 0; j <= total; ++j) obj[j] -= f * t[leave][j];
    basis[leave] = enter;
  }
  return obj[total] == 0;  // residual objective value == -0
}

}  // namespace trax

#endif
