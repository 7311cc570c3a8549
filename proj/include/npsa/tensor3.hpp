#pragma once

// Cubic third-order tensors (L x L x L). Storage is L frontal slices, each
// column-major, so element (i, j, k) lives at i + L*j + L*L*k and the raw
// buffer is exactly vec(T).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"

namespace npsa {

inline constexpr double kUnitTolerance = 1e-8;
inline constexpr double kSupersymmetryTolerance = 1e-10;

inline void require_unit(std::span<const double> u, const char* what) {
  if (std::abs(norm2(u) - 1.0) > kUnitTolerance)
    throw Error(ErrorCode::NotUnit, std::string(what) + ": direction must have unit 2-norm");
}

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(std::size_t dim) : dim_(dim), data_(dim * dim * dim, 0.0) {}

  /// Builds from frontal slices; slices[k](i, j) = t(i, j, k).
  static Tensor3 from_slices(std::span<const Matrix> slices) {
    const std::size_t L = slices.size();
    Tensor3 t(L);
    for (std::size_t k = 0; k < L; ++k) {
      if (slices[k].rows() != L || slices[k].cols() != L)
        throw Error(ErrorCode::ShapeMismatch, "frontal slice must be L x L");
      std::copy(slices[k].data().begin(), slices[k].data().end(),
                t.data_.begin() + static_cast<std::ptrdiff_t>(k * L * L));
    }
    return t;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j, std::size_t k) noexcept {
    return data_[i + dim_ * (j + dim_ * k)];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return data_[i + dim_ * (j + dim_ * k)];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix slice(std::size_t k) const {
    const std::size_t n = dim_ * dim_;
    return Matrix(dim_, dim_,
                  std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(k * n),
                                      data_.begin() + static_cast<std::ptrdiff_t>((k + 1) * n)));
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

  bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  /// Largest deviation between an entry and any of its index permutations.
  double asymmetry() const noexcept {
    double worst = 0.0;
    const auto& t = *this;
    for (std::size_t k = 0; k < dim_; ++k)
      for (std::size_t j = 0; j < dim_; ++j)
        for (std::size_t i = 0; i < dim_; ++i) {
          const double v = t(i, j, k);
          for (double w : {t(i, k, j), t(j, i, k), t(j, k, i), t(k, i, j), t(k, j, i)})
            worst = std::max(worst, std::abs(v - w));
        }
    return worst;
  }

  bool is_supersymmetric(double rel_tol = kSupersymmetryTolerance) const noexcept {
    return asymmetry() <= rel_tol * max_abs();
  }

  /// Average over the six index permutations.
  Tensor3 symmetrized() const {
    Tensor3 out(dim_);
    const auto& t = *this;
    for (std::size_t k = 0; k < dim_; ++k)
      for (std::size_t j = 0; j < dim_; ++j)
        for (std::size_t i = 0; i < dim_; ++i)
          out(i, j, k) = (t(i, j, k) + t(i, k, j) + t(j, i, k) + t(j, k, i) + t(k, i, j) +
                          t(k, j, i)) /
                         6.0;
    return out;
  }

  Tensor3& operator+=(const Tensor3& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    check_same_dim(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor3& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  void check_same_dim(const Tensor3& o) const {
    if (dim_ != o.dim_) throw Error(ErrorCode::ShapeMismatch, "tensor dimensions differ");
  }

  std::size_t dim_ = 0;
  std::vector<double> data_;
};

inline Vector vec(const Tensor3& t) { return Vector(t.data().begin(), t.data().end()); }

inline Tensor3 unvec(std::span<const double> s, std::size_t L) {
  if (s.size() != L * L * L)
    throw Error(ErrorCode::ShapeMismatch, "unvec expects L^3 entries");
  Tensor3 t(L);
  std::copy(s.begin(), s.end(), t.data().begin());
  return t;
}

/// (t x_mode m)(.., j, ..) = sum_i t(.., i, ..) m(j, i). Only square L x L
/// factors are accepted, so the result stays cubic.
inline Tensor3 n_mode_product(const Tensor3& t, const Matrix& m, int mode) {
  const std::size_t L = t.dim();
  if (m.rows() != L || m.cols() != L)
    throw Error(ErrorCode::ShapeMismatch, "n-mode factor must be L x L");
  Tensor3 out(L);
  switch (mode) {
    case 1:
      // Each frontal slice is left-multiplied by m.
      for (std::size_t k = 0; k < L; ++k)
        for (std::size_t j = 0; j < L; ++j)
          for (std::size_t i = 0; i < L; ++i) {
            const double tij = t(i, j, k);
            if (tij == 0.0) continue;
            for (std::size_t r = 0; r < L; ++r) out(r, j, k) += m(r, i) * tij;
          }
      break;
    case 2:
      // Each frontal slice is right-multiplied by m^T.
      for (std::size_t k = 0; k < L; ++k)
        for (std::size_t j = 0; j < L; ++j)
          for (std::size_t r = 0; r < L; ++r) {
            const double mrj = m(r, j);
            if (mrj == 0.0) continue;
            for (std::size_t i = 0; i < L; ++i) out(i, r, k) += t(i, j, k) * mrj;
          }
      break;
    case 3:
      // Output slice r is a combination of input slices.
      for (std::size_t k = 0; k < L; ++k)
        for (std::size_t r = 0; r < L; ++r) {
          const double mrk = m(r, k);
          if (mrk == 0.0) continue;
          const std::size_t n = L * L;
          const double* src = t.data().data() + k * n;
          double* dst = out.data().data() + r * n;
          for (std::size_t e = 0; e < n; ++e) dst[e] += mrk * src[e];
        }
      break;
    default:
      throw Error(ErrorCode::ShapeMismatch, "mode must be 1, 2 or 3");
  }
  return out;
}

/// v_j = sum_{i,k} t(i, j, k) u_i u_k.
inline Vector contract_13(const Tensor3& t, std::span<const double> u) {
  const std::size_t L = t.dim();
  if (u.size() != L) throw Error(ErrorCode::ShapeMismatch, "contraction vector length");
  Vector v(L, 0.0);
  for (std::size_t k = 0; k < L; ++k) {
    const double uk = u[k];
    if (uk == 0.0) continue;
    for (std::size_t j = 0; j < L; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < L; ++i) s += t(i, j, k) * u[i];
      v[j] += s * uk;
    }
  }
  return v;
}

/// M(j, k) = sum_i t(i, j, k) u_i, i.e. t x_1 u^T as an L x L matrix.
inline Matrix contract_1(const Tensor3& t, std::span<const double> u) {
  const std::size_t L = t.dim();
  if (u.size() != L) throw Error(ErrorCode::ShapeMismatch, "contraction vector length");
  Matrix m(L, L);
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t j = 0; j < L; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < L; ++i) s += t(i, j, k) * u[i];
      m(j, k) = s;
    }
  return m;
}

/// Cubic form t x_1 u x_2 u x_3 u without the unit-norm precondition.
inline double cubic_form(const Tensor3& t, std::span<const double> u) {
  return dot(u, contract_13(t, u));
}

/// Skewness along the unit direction u. Throws NotUnit.
inline double skewness(const Tensor3& t, std::span<const double> u) {
  if (u.size() != t.dim()) throw Error(ErrorCode::ShapeMismatch, "direction length");
  require_unit(u, "skewness");
  return cubic_form(t, u);
}

/// acc(i, j, k) += weight * r_i r_j r_k.
inline void accumulate_outer3(Tensor3& acc, std::span<const double> r, double weight = 1.0) {
  const std::size_t L = acc.dim();
  if (r.size() != L) throw Error(ErrorCode::ShapeMismatch, "outer product vector length");
  for (std::size_t k = 0; k < L; ++k) {
    const double wk = weight * r[k];
    for (std::size_t j = 0; j < L; ++j) {
      const double wjk = wk * r[j];
      for (std::size_t i = 0; i < L; ++i) acc(i, j, k) += wjk * r[i];
    }
  }
}

/// r o r o r for a single vector.
inline Tensor3 outer3(std::span<const double> r) {
  Tensor3 t(r.size());
  accumulate_outer3(t, r, 1.0);
  return t;
}

}  // namespace npsa
