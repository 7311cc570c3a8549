#pragma once

#include <cstddef>
#include <vector>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"
#include "npsa/parallel.hpp"
#include "npsa/tensor3.hpp"
#include "npsa/whitening.hpp"

namespace npsa {

namespace detail {

inline constexpr std::size_t kCoskewChunk = 2048;

inline std::size_t packed_size(std::size_t L) { return L * (L + 1) * (L + 2) / 6; }

// Sums r_i r_j r_k for i <= j <= k over pixels [begin, end).
inline std::vector<double> packed_third_moments(const DataMatrix& r, std::size_t begin,
                                                std::size_t end) {
  const std::size_t L = r.rows();
  std::vector<double> acc(packed_size(L), 0.0);
  for (std::size_t n = begin; n < end; ++n) {
    const double* x = r.col(n).data();
    std::size_t idx = 0;
    for (std::size_t i = 0; i < L; ++i) {
      const double xi = x[i];
      for (std::size_t j = i; j < L; ++j) {
        const double xij = xi * x[j];
        for (std::size_t k = j; k < L; ++k) acc[idx++] += xij * x[k];
      }
    }
  }
  return acc;
}

}  // namespace detail

/// S = (1/N) sum_n r_n o r_n o r_n. Only the i <= j <= k simplex is
/// accumulated, in fixed-size pixel chunks reduced pairwise, so the result is
/// bit-identical for any worker count.
inline Tensor3 build_coskewness(const DataMatrix& r) {
  const std::size_t L = r.rows();
  const std::size_t N = r.cols();
  if (N == 0) throw Error(ErrorCode::EmptyData, "no pixels to accumulate");

  const std::size_t chunks = (N + detail::kCoskewChunk - 1) / detail::kCoskewChunk;
  std::vector<std::vector<double>> partials(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * detail::kCoskewChunk;
    partials[c] = detail::packed_third_moments(r, begin, std::min(N, begin + detail::kCoskewChunk));
  });
  const std::vector<double> sum =
      pairwise_reduce(std::move(partials), [](std::vector<double> a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
      });

  Tensor3 s(L);
  const double inv_n = 1.0 / static_cast<double>(N);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i; j < L; ++j)
      for (std::size_t k = j; k < L; ++k) {
        const double v = sum[idx++] * inv_n;
        s(i, j, k) = s(i, k, j) = s(j, i, k) = s(j, k, i) = s(k, i, j) = s(k, j, i) = v;
      }
  return s;
}

/// Third sample moment of u^T r when s came from build_coskewness(r).
inline double directional_skewness(const Tensor3& s, std::span<const double> u) {
  return skewness(s, u);
}

}  // namespace npsa
