#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "gwr/scalar.hpp"

namespace gwr {

// Dense matrix over an exact-rational or float scalar backend. All matrices
// in the K-space pipeline are tiny (at most support-size square), so no
// sparse storage is used anywhere.
template <class S>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<S> a;          // row-major
  double rank_tol = kDefaultRankTol;  // used by the float backend only

  Matrix() = default;
  Matrix(int r, int c, double tol = kDefaultRankTol)
      : rows(r), cols(c), a(static_cast<size_t>(r) * c, scalar_traits<S>::zero()), rank_tol(tol) {}

  S& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  const S& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

  static Matrix identity(int n, double tol = kDefaultRankTol) {
    Matrix m(n, n, tol);
    for (int i = 0; i < n; ++i) m(i, i) = scalar_traits<S>::one();
    return m;
  }
};

template <class S>
using Vector = std::vector<S>;

template <class S>
Matrix<S> operator+(const Matrix<S>& x, const Matrix<S>& y) {
  Matrix<S> r(x.rows, x.cols, std::max(x.rank_tol, y.rank_tol));
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
  return r;
}

template <class S>
Matrix<S> operator-(const Matrix<S>& x, const Matrix<S>& y) {
  Matrix<S> r(x.rows, x.cols, std::max(x.rank_tol, y.rank_tol));
  for (size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
  return r;
}

template <class S>
Matrix<S> operator*(const S& c, const Matrix<S>& x) {
  Matrix<S> r = x;
  for (auto& v : r.a) v = c * v;
  return r;
}

template <class S>
Matrix<S> operator*(const Matrix<S>& x, const Matrix<S>& y) {
  Matrix<S> r(x.rows, y.cols, std::max(x.rank_tol, y.rank_tol));
  for (int i = 0; i < x.rows; ++i)
    for (int k = 0; k < x.cols; ++k) {
      const S& xik = x(i, k);
      if (scalar_traits<S>::exact && xik == scalar_traits<S>::zero()) continue;
      for (int j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
    }
  return r;
}

template <class S>
bool operator==(const Matrix<S>& x, const Matrix<S>& y) {
  return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
}

template <class S>
Matrix<S> transpose(const Matrix<S>& x) {
  Matrix<S> r(x.cols, x.rows, x.rank_tol);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
  return r;
}

template <class S>
Vector<S> mat_vec(const Matrix<S>& x, const Vector<S>& v) {
  Vector<S> r(x.rows, scalar_traits<S>::zero());
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) r[i] += x(i, j) * v[j];
  return r;
}

template <class S>
S dot(const Vector<S>& x, const Vector<S>& y) {
  S r = scalar_traits<S>::zero();
  for (size_t i = 0; i < x.size(); ++i) r += x[i] * y[i];
  return r;
}

template <class S>
S max_abs(const Matrix<S>& x) {
  S m = scalar_traits<S>::zero();
  for (const auto& v : x.a) {
    S av = scalar_traits<S>::abs(v);
    if (m < av) m = av;
  }
  return m;
}

template <class S>
bool is_symmetric(const Matrix<S>& x) {
  if (x.rows != x.cols) return false;
  S scale = max_abs(x);
  for (int i = 0; i < x.rows; ++i)
    for (int j = i + 1; j < x.cols; ++j)
      if (!scalar_traits<S>::is_zero(x(i, j) - x(j, i), scale, x.rank_tol)) return false;
  return true;
}

template <class S>
void require_symmetric(const Matrix<S>& x, const char* who) {
  if (!is_symmetric(x)) fail(errc::asymmetric_input, std::string(who) + ": matrix is not symmetric");
}

// In-place reduced row echelon form; returns pivot column indices.
// Rational mode pivots on the first nonzero entry, float mode on the
// largest magnitude with the rank tolerance as the zero cut.
template <class S>
std::vector<int> rref_inplace(Matrix<S>& m) {
  std::vector<int> pivots;
  S scale = max_abs(m);
  int row = 0;
  for (int col = 0; col < m.cols && row < m.rows; ++col) {
    int pr = -1;
    if constexpr (scalar_traits<S>::exact) {
      for (int i = row; i < m.rows; ++i)
        if (m(i, col) != scalar_traits<S>::zero()) { pr = i; break; }
    } else {
      S best = scalar_traits<S>::zero();
      for (int i = row; i < m.rows; ++i) {
        S av = scalar_traits<S>::abs(m(i, col));
        if (av > best) { best = av; pr = i; }
      }
      if (pr >= 0 && scalar_traits<S>::is_zero(m(pr, col), scale, m.rank_tol)) pr = -1;
    }
    if (pr < 0) continue;
    if (pr != row)
      for (int j = 0; j < m.cols; ++j) std::swap(m(pr, j), m(row, j));
    S inv = scalar_traits<S>::one() / m(row, col);
    for (int j = 0; j < m.cols; ++j) m(row, j) = m(row, j) * inv;
    for (int i = 0; i < m.rows; ++i) {
      if (i == row) continue;
      S f = m(i, col);
      if (scalar_traits<S>::exact && f == scalar_traits<S>::zero()) continue;
      for (int j = 0; j < m.cols; ++j) m(i, j) = m(i, j) - f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class S>
int rank(Matrix<S> m) {
  return static_cast<int>(rref_inplace(m).size());
}

// Null-space basis of an arbitrary rectangular matrix, as columns.
template <class S>
Matrix<S> kernel_basis(Matrix<S> m) {
  const int n = m.cols;
  std::vector<int> pivots = rref_inplace(m);
  std::vector<bool> is_pivot(n, false);
  for (int p : pivots) is_pivot[p] = true;
  std::vector<int> free_cols;
  for (int j = 0; j < n; ++j)
    if (!is_pivot[j]) free_cols.push_back(j);
  Matrix<S> basis(n, static_cast<int>(free_cols.size()), m.rank_tol);
  for (size_t fi = 0; fi < free_cols.size(); ++fi) {
    int fc = free_cols[fi];
    basis(fc, static_cast<int>(fi)) = scalar_traits<S>::one();
    for (size_t pi = 0; pi < pivots.size(); ++pi)
      basis(pivots[pi], static_cast<int>(fi)) = -m(static_cast<int>(pi), fc);
  }
  return basis;
}

// Subspace of C^n with a stored basis. Rational mode keeps the basis in a
// canonical row-reduced form so identical subspaces compare equal;
// float mode keeps it orthonormalized.
template <class S>
struct Subspace {
  int ambient = 0;
  Matrix<S> basis;  // ambient x dim, columns span the space

  int dim() const { return basis.cols; }

  Matrix<S> gram() const { return transpose(basis) * basis; }
};

template <class S>
Subspace<S> make_subspace(int ambient, Matrix<S> columns) {
  // canonicalize: row-reduce the transposed column set and keep nonzero rows
  Matrix<S> rt = transpose(columns);
  std::vector<int> pivots = rref_inplace(rt);
  Matrix<S> basis(ambient, static_cast<int>(pivots.size()), columns.rank_tol);
  for (size_t r = 0; r < pivots.size(); ++r)
    for (int j = 0; j < ambient; ++j) basis(j, static_cast<int>(r)) = rt(static_cast<int>(r), j);
  if constexpr (!scalar_traits<S>::exact) {
    // Gram-Schmidt for numerical sanity of downstream Gram inversions
    for (int c = 0; c < basis.cols; ++c) {
      for (int p = 0; p < c; ++p) {
        S proj = scalar_traits<S>::zero();
        for (int i = 0; i < ambient; ++i) proj += basis(i, p) * basis(i, c);
        for (int i = 0; i < ambient; ++i) basis(i, c) -= proj * basis(i, p);
      }
      S nrm = scalar_traits<S>::zero();
      for (int i = 0; i < ambient; ++i) nrm += basis(i, c) * basis(i, c);
      nrm = std::sqrt(nrm);
      for (int i = 0; i < ambient; ++i) basis(i, c) /= nrm;
    }
  }
  Subspace<S> s;
  s.ambient = ambient;
  s.basis = std::move(basis);
  return s;
}

template <class S>
Subspace<S> zero_subspace(int ambient, double tol = kDefaultRankTol) {
  Subspace<S> s;
  s.ambient = ambient;
  s.basis = Matrix<S>(ambient, 0, tol);
  return s;
}

// Square-matrix inverse by Gauss-Jordan; exact in rational mode.
template <class S>
Matrix<S> inverse(const Matrix<S>& m) {
  Matrix<S> aug(m.rows, 2 * m.cols, m.rank_tol);
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) aug(i, j) = m(i, j);
    aug(i, m.cols + i) = scalar_traits<S>::one();
  }
  std::vector<int> pivots = rref_inplace(aug);
  if (static_cast<int>(pivots.size()) != m.rows)
    fail(errc::singular_solve, "inverse: singular matrix");
  Matrix<S> r(m.rows, m.cols, m.rank_tol);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) r(i, j) = aug(i, m.cols + j);
  return r;
}

// Cyclic Jacobi eigendecomposition for symmetric matrices, float backend
// only. Eigenvalues sorted descending; A = V diag(w) V^T.
inline void symmetric_eigen_impl(const Matrix<double>& m, std::vector<double>& w,
                                 Matrix<double>& v) {
  const int n = m.rows;
  Matrix<double> a = m;
  v = Matrix<double>::identity(n, m.rank_tol);
  double norm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm += a(i, j) * a(i, j);
  norm = std::sqrt(norm);
  const double eps = (norm > 0 ? norm : 1.0) * 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (std::sqrt(off) <= eps) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= eps * 1e-2) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double apq = a(p, q), app = a(p, p), aqq = a(q, q);
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
          }
          double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
  }
  w.resize(n);
  for (int i = 0; i < n; ++i) w[i] = a(i, i);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return w[x] > w[y]; });
  std::vector<double> ws(n);
  Matrix<double> vs(n, n, m.rank_tol);
  for (int i = 0; i < n; ++i) {
    ws[i] = w[order[i]];
    for (int r = 0; r < n; ++r) vs(r, i) = v(r, order[i]);
  }
  w = std::move(ws);
  v = std::move(vs);
}

template <class S>
void symmetric_eigen(const Matrix<S>& m, std::vector<S>& w, Matrix<S>& v) {
  if constexpr (scalar_traits<S>::exact) {
    (void)m; (void)w; (void)v;
    fail(errc::rational_backend_unsupported, "symmetric_eigen: float backend only");
  } else {
    require_symmetric(m, "symmetric_eigen");
    symmetric_eigen_impl(m, w, v);
  }
}

// Null space of a square symmetric matrix as a canonicalized subspace.
template <class S>
Subspace<S> null_space(const Matrix<S>& m) {
  require_symmetric(m, "null_space");
  if constexpr (scalar_traits<S>::exact) {
    return make_subspace(m.cols, kernel_basis(m));
  } else {
    std::vector<S> w;
    Matrix<S> v;
    symmetric_eigen_impl(m, w, v);
    double scale = 0.0;
    for (double x : w) scale = std::max(scale, std::abs(x));
    Matrix<S> cols(m.rows, 0, m.rank_tol);
    std::vector<int> keep;
    for (int i = 0; i < m.rows; ++i)
      if (std::abs(w[i]) <= m.rank_tol * std::max(scale, 1.0)) keep.push_back(i);
    Matrix<S> basis(m.rows, static_cast<int>(keep.size()), m.rank_tol);
    for (size_t c = 0; c < keep.size(); ++c)
      for (int r = 0; r < m.rows; ++r) basis(r, static_cast<int>(c)) = v(r, keep[c]);
    Subspace<S> s;
    s.ambient = m.rows;
    s.basis = std::move(basis);
    return s;
  }
}

// Basis of the column space, as columns of the original matrix.
template <class S>
Matrix<S> column_space_basis(const Matrix<S>& m) {
  Matrix<S> work = m;
  std::vector<int> pivots = rref_inplace(work);
  Matrix<S> b(m.rows, static_cast<int>(pivots.size()), m.rank_tol);
  for (size_t c = 0; c < pivots.size(); ++c)
    for (int r = 0; r < m.rows; ++r) b(r, static_cast<int>(c)) = m(r, pivots[c]);
  return b;
}

// Moore-Penrose pseudo-inverse of a symmetric matrix. Rational mode solves
// on the range (A^+ = B (B^T A B)^{-1} B^T with B a range basis), which
// keeps every classification decision bit-exact; float mode inverts the
// eigenvalues above the rank cut.
template <class S>
Matrix<S> pseudo_inverse(const Matrix<S>& m) {
  require_symmetric(m, "pseudo_inverse");
  if constexpr (scalar_traits<S>::exact) {
    Matrix<S> b = column_space_basis(m);
    if (b.cols == 0) return Matrix<S>(m.rows, m.cols, m.rank_tol);
    Matrix<S> core = inverse(transpose(b) * m * b);
    return b * core * transpose(b);
  } else {
    std::vector<S> w;
    Matrix<S> v;
    symmetric_eigen_impl(m, w, v);
    double scale = 0.0;
    for (double x : w) scale = std::max(scale, std::abs(x));
    Matrix<S> r(m.rows, m.cols, m.rank_tol);
    for (int k = 0; k < m.rows; ++k) {
      if (std::abs(w[k]) <= m.rank_tol * std::max(scale, 1.0)) continue;
      double inv = 1.0 / w[k];
      for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) += inv * v(i, k) * v(j, k);
    }
    return r;
  }
}

// Orthogonal projection onto a subspace: B (B^T B)^{-1} B^T.
template <class S>
Matrix<S> orthogonal_projection(const Subspace<S>& s) {
  if (s.dim() == 0) return Matrix<S>(s.ambient, s.ambient, s.basis.rank_tol);
  const Matrix<S>& b = s.basis;
  return b * inverse(transpose(b) * b) * transpose(b);
}

template <class S>
Subspace<S> subspace_intersect(const Subspace<S>& s1, const Subspace<S>& s2) {
  if (s1.ambient != s2.ambient) fail(errc::bad_argument, "subspace_intersect: ambient mismatch");
  if (s1.dim() == 0 || s2.dim() == 0) return zero_subspace<S>(s1.ambient, s1.basis.rank_tol);
  Matrix<S> stacked(s1.ambient, s1.dim() + s2.dim(), std::max(s1.basis.rank_tol, s2.basis.rank_tol));
  for (int i = 0; i < s1.ambient; ++i) {
    for (int j = 0; j < s1.dim(); ++j) stacked(i, j) = s1.basis(i, j);
    for (int j = 0; j < s2.dim(); ++j) stacked(i, s1.dim() + j) = -s2.basis(i, j);
  }
  Matrix<S> ker = kernel_basis(stacked);
  Matrix<S> cols(s1.ambient, ker.cols, stacked.rank_tol);
  for (int c = 0; c < ker.cols; ++c)
    for (int i = 0; i < s1.ambient; ++i) {
      S acc = scalar_traits<S>::zero();
      for (int j = 0; j < s1.dim(); ++j) acc += s1.basis(i, j) * ker(j, c);
      cols(i, c) = acc;
    }
  return make_subspace(s1.ambient, cols);
}

// S1 intersected with the orthogonal complement of S2.
template <class S>
Subspace<S> subspace_orthocomplement_within(const Subspace<S>& s1, const Subspace<S>& s2) {
  if (s1.ambient != s2.ambient)
    fail(errc::bad_argument, "subspace_orthocomplement_within: ambient mismatch");
  if (s1.dim() == 0) return zero_subspace<S>(s1.ambient, s1.basis.rank_tol);
  if (s2.dim() == 0) return s1;
  Matrix<S> cond = transpose(s2.basis) * s1.basis;  // dim2 x dim1
  Matrix<S> ker = kernel_basis(cond);
  Matrix<S> cols(s1.ambient, ker.cols, s1.basis.rank_tol);
  for (int c = 0; c < ker.cols; ++c)
    for (int i = 0; i < s1.ambient; ++i) {
      S acc = scalar_traits<S>::zero();
      for (int j = 0; j < s1.dim(); ++j) acc += s1.basis(i, j) * ker(j, c);
      cols(i, c) = acc;
    }
  return make_subspace(s1.ambient, cols);
}

// Rank-revealing LDL^T of a positive semidefinite symmetric matrix:
// A = sum_p d_p l_p l_p^T with d_p > 0, exact in rational mode. Diagonal
// pivoting; a PSD matrix with a zero diagonal entry has that whole row zero,
// which the loop relies on.
template <class S>
std::vector<std::pair<Vector<S>, S>> ldlt_psd(Matrix<S> m) {
  require_symmetric(m, "ldlt_psd");
  const int n = m.rows;
  S scale = max_abs(m);
  std::vector<std::pair<Vector<S>, S>> terms;
  for (int step = 0; step < n; ++step) {
    int p = -1;
    S best = scalar_traits<S>::zero();
    for (int i = 0; i < n; ++i)
      if (m(i, i) > best) { best = m(i, i); p = i; }
    if (p < 0 || scalar_traits<S>::is_zero(m(p, p), scale, m.rank_tol)) break;
    S d = m(p, p);
    Vector<S> l(n);
    for (int i = 0; i < n; ++i) l[i] = m(i, p) / d;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) -= d * l[i] * l[j];
    terms.emplace_back(std::move(l), d);
  }
  // residual must vanish for PSD input
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!scalar_traits<S>::is_zero(m(i, j), scale, 64 * m.rank_tol))
        fail(errc::not_positive_definite, "ldlt_psd: input is not positive semidefinite");
  return terms;
}

// PD certificate: LDL^T with full rank and positive pivots.
template <class S>
bool is_positive_definite(const Matrix<S>& m) {
  try {
    auto t = ldlt_psd(m);
    return static_cast<int>(t.size()) == m.rows;
  } catch (const error&) {
    return false;
  }
}

}  // namespace gwr
