#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"

namespace npsa {

/// Bands x pixels; column n is the spectrum of pixel n.
using DataMatrix = Matrix;

inline constexpr double kWhiteningEigenCutoff = 1e-10;

struct WhiteningModel {
  Vector mean;         // length L
  Matrix operator_F;   // L x L', columns e_k / sqrt(d_k) over retained pairs
  Vector eigenvalues;  // all L covariance eigenvalues, descending
  std::size_t retained = 0;

  std::size_t bands() const noexcept { return mean.size(); }
};

/// Covariance with 1/N normalization.
inline Matrix covariance(const DataMatrix& x, std::span<const double> mean) {
  const std::size_t L = x.rows();
  const std::size_t N = x.cols();
  Matrix c(L, L);
  Vector d(L);
  for (std::size_t n = 0; n < N; ++n) {
    auto xn = x.col(n);
    for (std::size_t i = 0; i < L; ++i) d[i] = xn[i] - mean[i];
    for (std::size_t j = 0; j < L; ++j) {
      const double dj = d[j];
      for (std::size_t i = j; i < L; ++i) c(i, j) += d[i] * dj;
    }
  }
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t i = j; i < L; ++i) c(j, i) = c(i, j) = c(i, j) / static_cast<double>(N);
  return c;
}

inline Vector column_mean(const DataMatrix& x) {
  Vector m(x.rows(), 0.0);
  for (std::size_t n = 0; n < x.cols(); ++n) {
    auto xn = x.col(n);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += xn[i];
  }
  for (double& v : m) v /= static_cast<double>(x.cols());
  return m;
}

/// Mean, covariance eigendecomposition and F = E D^{-1/2}. Eigenvalues below
/// 1e-10 of the largest are dropped, so F may have fewer columns than bands.
inline WhiteningModel fit_whitening(const DataMatrix& x) {
  if (x.cols() < 2) throw Error(ErrorCode::DegenerateData, "whitening needs at least two pixels");
  if (x.rows() == 0) throw Error(ErrorCode::DegenerateData, "no bands");

  WhiteningModel model;
  model.mean = column_mean(x);
  const SymEig eig = sym_eig(covariance(x, model.mean));
  model.eigenvalues = eig.values;

  // Constant data still leaves rounding-level variance behind after centering.
  const double scale = x.max_abs();
  const double wmax = eig.values.front();
  if (!(wmax > 0.0) || wmax <= 1e-20 * scale * scale)
    throw Error(ErrorCode::DegenerateData, "covariance has no significant eigenvalue");

  const double cut = kWhiteningEigenCutoff * wmax;
  model.retained = static_cast<std::size_t>(std::count_if(
      eig.values.begin(), eig.values.end(), [cut](double w) { return w > cut; }));

  model.operator_F = Matrix(x.rows(), model.retained);
  for (std::size_t k = 0; k < model.retained; ++k) {
    const double f = 1.0 / std::sqrt(eig.values[k]);
    auto src = eig.vectors.col(k);
    auto dst = model.operator_F.col(k);
    for (std::size_t i = 0; i < x.rows(); ++i) dst[i] = src[i] * f;
  }
  return model;
}

/// R = F^T (X - m 1^T), shape L' x N.
inline DataMatrix apply_whitening(const WhiteningModel& model, const DataMatrix& x) {
  if (x.rows() != model.bands())
    throw Error(ErrorCode::ShapeMismatch, "band count differs from the fitted model");
  const std::size_t L = x.rows();
  const std::size_t Lr = model.retained;
  DataMatrix r(Lr, x.cols());
  Vector d(L);
  for (std::size_t n = 0; n < x.cols(); ++n) {
    auto xn = x.col(n);
    for (std::size_t i = 0; i < L; ++i) d[i] = xn[i] - model.mean[i];
    auto rn = r.col(n);
    for (std::size_t k = 0; k < Lr; ++k) rn[k] = dot(model.operator_F.col(k), d);
  }
  return r;
}

}  // namespace npsa
