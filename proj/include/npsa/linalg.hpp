#pragma once

// Dense column-major matrices and the handful of factorizations the skewness
// pipeline needs: cyclic Jacobi for symmetric eigenproblems, one-sided Jacobi
// for singular values, Kronecker products and orthogonal-complement projectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npsa/error.hpp"

namespace npsa {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
      : rows_(rows), cols_(cols), data_(std::move(column_major)) {
    if (data_.size() != rows_ * cols_)
      throw Error(ErrorCode::ShapeMismatch, "entry count does not match rows*cols");
  }

  /// Row-wise literal, e.g. Matrix::from_rows({{1, 2}, {3, 4}}).
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw Error(ErrorCode::ShapeMismatch, "ragged row literal");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  /// n x 1 matrix holding the vector as its only column.
  static Matrix column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i + rows_ * j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i + rows_ * j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::span<double> col(std::size_t j) noexcept { return {data_.data() + rows_ * j, rows_}; }
  std::span<const double> col(std::size_t j) const noexcept {
    return {data_.data() + rows_ * j, rows_};
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
      for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double trace() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw Error(ErrorCode::ShapeMismatch, "matrix shapes differ");
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::ShapeMismatch,
                "product of " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    auto cj = c.col(j);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto ak = a.col(k);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

inline Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw Error(ErrorCode::ShapeMismatch, "matrix-vector size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    auto ak = a.col(k);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += ak[i] * xk;
  }
  return y;
}

inline Vector operator*(const Matrix& a, const Vector& x) { return a * std::span<const double>(x); }

// ---- vector helpers --------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::ShapeMismatch, "dot of unequal lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vector normalized(std::span<const double> a) {
  const double n = norm2(a);
  if (n == 0.0) throw Error(ErrorCode::ZeroVector, "cannot normalize the zero vector");
  Vector out(a.begin(), a.end());
  for (double& v : out) v /= n;
  return out;
}

inline Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    for (std::size_t i = 0; i < a.size(); ++i) m(i, j) = a[i] * b[j];
  return m;
}

/// Angle in degrees between two directions, ignoring sign.
inline double unsigned_angle_deg(std::span<const double> a, std::span<const double> b) {
  const double c = std::abs(dot(a, b)) / (norm2(a) * norm2(b));
  return std::acos(std::min(1.0, c)) * 180.0 / std::numbers::pi;
}

// ---- Kronecker algebra -----------------------------------------------------

/// Block (i,j) of the result is a(i,j) * b.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ja = 0; ja < a.cols(); ++ja)
    for (std::size_t jb = 0; jb < b.cols(); ++jb) {
      auto out = k.col(ja * b.cols() + jb);
      auto bcol = b.col(jb);
      for (std::size_t ia = 0; ia < a.rows(); ++ia) {
        const double s = a(ia, ja);
        double* dst = out.data() + ia * b.rows();
        for (std::size_t ib = 0; ib < b.rows(); ++ib) dst[ib] = s * bcol[ib];
      }
    }
  return k;
}

inline Vector kron(std::span<const double> a, std::span<const double> b) {
  Vector k(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) k[i * b.size() + j] = a[i] * b[j];
  return k;
}

/// p-fold Kronecker power; p = 0 yields the 1x1 identity.
inline Matrix kron_power(const Matrix& a, unsigned p) {
  Matrix out = Matrix::identity(1);
  for (unsigned i = 0; i < p; ++i) out = kron(out, a);
  return out;
}

inline Vector kron_power(std::span<const double> a, unsigned p) {
  Vector out{1.0};
  for (unsigned i = 0; i < p; ++i) out = kron(out, a);
  return out;
}

/// Stacks the columns.
inline Vector vec(const Matrix& a) { return Vector(a.data().begin(), a.data().end()); }

inline Matrix unvec(std::span<const double> v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw Error(ErrorCode::ShapeMismatch, "unvec size mismatch");
  return Matrix(rows, cols, std::vector<double>(v.begin(), v.end()));
}

// ---- symmetric eigendecomposition -------------------------------------------

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // columns match values
};

struct JacobiOptions {
  int max_sweeps = 50;
  double off_tolerance = 1e-12;  // relative to ||a||_F
  double symmetry_tolerance = 1e-10;  // relative to max |a_ij|
};

/// Cyclic Jacobi. Throws NotSymmetric / NoConvergence.
inline SymEig sym_eig(const Matrix& input, const JacobiOptions& opt = {}) {
  if (!input.is_square()) throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  const std::size_t n = input.rows();
  const double scale = input.max_abs();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i)
      if (std::abs(input(i, j) - input(j, i)) > opt.symmetry_tolerance * scale)
        throw Error(ErrorCode::NotSymmetric, "asymmetry exceeds tolerance");

  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double target = opt.off_tolerance * input.frobenius();

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t q = 1; q < n; ++q)
      for (std::size_t p = 0; p < q; ++p) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (sweep++ == opt.max_sweeps)
      throw Error(ErrorCode::NoConvergence, "Jacobi sweep cap reached");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        auto vp = v.col(p);
        auto vq = v.col(q);
        for (std::size_t r = 0; r < n; ++r) {
          const double x = vp[r];
          const double y = vq[r];
          vp[r] = c * x - s * y;
          vq[r] = s * x + c * y;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  SymEig out{Vector(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    std::copy_n(v.col(order[k]).begin(), n, out.vectors.col(k).begin());
  }
  return out;
}

/// Singular values (descending) by one-sided Jacobi; accurate for small ones,
/// unlike the square roots of eig(A^T A).
inline Vector singular_values(const Matrix& input, int max_sweeps = 60) {
  Matrix u = input.rows() >= input.cols() ? input : input.transpose();
  const std::size_t m = u.rows();
  const std::size_t n = u.cols();
  const double eps = 4.0 * static_cast<double>(m) * std::numeric_limits<double>::epsilon();
  // Columns below this squared norm are numerically zero and are left alone.
  const double negligible = 1e-30 * input.frobenius() * input.frobenius();

  for (int sweep = 0;; ++sweep) {
    if (sweep == max_sweeps) throw Error(ErrorCode::NoConvergence, "one-sided Jacobi sweep cap");
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto up = u.col(p);
        auto uq = u.col(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += up[i] * up[i];
          beta += uq[i] * uq[i];
          gamma += up[i] * uq[i];
        }
        if (alpha <= negligible || beta <= negligible) continue;
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = up[i];
          const double y = uq[i];
          up[i] = c * x - s * y;
          uq[i] = s * x + c * y;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(u.col(j));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

inline constexpr double kRankTolerance = 1e-9;

/// Number of singular values above kRankTolerance times the largest.
inline std::size_t rank(const Matrix& a) {
  if (a.size() == 0) return 0;
  const Vector sv = singular_values(a);
  if (sv.front() == 0.0) return 0;
  const double cut = kRankTolerance * sv.front();
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [cut](double s) { return s > cut; }));
}

inline constexpr double kMaxGramCondition = 1e12;

/// P = I - S (S^T S)^{-1} S^T, with the Gram inverse taken through its
/// eigendecomposition. Throws RankDeficient when S^T S is ill-conditioned.
inline Matrix proj_complement(const Matrix& s) {
  const Matrix gram = s.transpose() * s;
  const SymEig eg = sym_eig(gram);
  const double wmax = eg.values.front();
  const double wmin = eg.values.back();
  if (!(wmin > 0.0) || wmax / wmin > kMaxGramCondition)
    throw Error(ErrorCode::RankDeficient, "Gram matrix condition number exceeds 1e12");

  // S V diag(w)^{-1/2}; the projector onto R(S) is W W^T.
  Matrix w = s * eg.vectors;
  for (std::size_t j = 0; j < w.cols(); ++j) {
    const double f = 1.0 / std::sqrt(eg.values[j]);
    for (double& x : w.col(j)) x *= f;
  }
  // Re-orthonormalize W: two modified Gram-Schmidt passes.
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      auto wj = w.col(j);
      for (std::size_t k = 0; k < j; ++k) {
        auto wk = w.col(k);
        const double c = dot(wk, wj);
        for (std::size_t i = 0; i < w.rows(); ++i) wj[i] -= c * wk[i];
      }
      const double nj = norm2(wj);
      for (double& x : wj) x /= nj;
    }
  Matrix p = Matrix::identity(s.rows()) - w * w.transpose();
  for (std::size_t j = 0; j < p.cols(); ++j)
    for (std::size_t i = j + 1; i < p.rows(); ++i) p(i, j) = p(j, i) = 0.5 * (p(i, j) + p(j, i));
  return p;
}

/// Solves a x = b by Gaussian elimination with partial pivoting.
inline Vector solve_linear(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (!a.is_square() || b.size() != n) throw Error(ErrorCode::ShapeMismatch, "solve_linear shapes");
  const double scale = a.max_abs();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) <= 1e-14 * scale)
      throw Error(ErrorCode::RankDeficient, "singular linear system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(c, j), a(piv, j));
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / a(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) a(r, j) -= f * a(c, j);
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t c = n; c-- > 0;) {
    double s = b[c];
    for (std::size_t j = c + 1; j < n; ++j) s -= a(c, j) * x[j];
    x[c] = s / a(c, c);
  }
  return x;
}

}  // namespace npsa
