#pragma once

// Separation quality for blind image separation: ISI of the global matrix
// P = W B, per-image MSE after unit-norm scaling, TMSE and correlation, with
// the permutation/sign ambiguity resolved by |correlation| matching.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"

namespace npsa {

/// Intersymbol interference; zero iff p is a scaled permutation.
inline double isi(const Matrix& p) {
  if (!p.is_square()) throw Error(ErrorCode::ShapeMismatch, "ISI needs a square matrix");
  const std::size_t n = p.rows();
  Vector row_max(n, 0.0), col_max(n, 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const double a = p(i, j) * p(i, j);
      row_max[i] = std::max(row_max[i], a);
      col_max[j] = std::max(col_max[j], a);
    }
  for (std::size_t k = 0; k < n; ++k)
    if (row_max[k] == 0.0 || col_max[k] == 0.0)
      throw Error(ErrorCode::DegenerateRowOrColumn, "ISI undefined with an all-zero row or column");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p(i, j) * p(i, j) / row_max[i];
    total += s - 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p(i, j) * p(i, j) / col_max[j];
    total += s - 1.0;
  }
  return total;
}

/// (1/N) || i/||i|| - i_hat/||i_hat|| ||^2.
inline double mse(std::span<const double> i, std::span<const double> i_hat) {
  if (i.size() != i_hat.size()) throw Error(ErrorCode::ShapeMismatch, "MSE of unequal sizes");
  if (i.empty()) throw Error(ErrorCode::ShapeMismatch, "MSE of empty images");
  const double ni = norm2(i);
  const double nh = norm2(i_hat);
  if (ni == 0.0 || nh == 0.0) throw Error(ErrorCode::ZeroVector, "MSE needs nonzero images");
  double s = 0.0;
  for (std::size_t k = 0; k < i.size(); ++k) {
    const double d = i[k] / ni - i_hat[k] / nh;
    s += d * d;
  }
  return s / static_cast<double>(i.size());
}

/// Mean of the squared per-pair MSEs.
inline double tmse(std::span<const double> per_pair_mse) {
  if (per_pair_mse.empty()) return 0.0;
  double s = 0.0;
  for (double m : per_pair_mse) s += m * m;
  return s / static_cast<double>(per_pair_mse.size());
}

/// Cosine similarity.
inline double correlation(std::span<const double> i, std::span<const double> i_hat) {
  if (i.size() != i_hat.size()) throw Error(ErrorCode::ShapeMismatch, "correlation of unequal sizes");
  const double ni = norm2(i);
  const double nh = norm2(i_hat);
  if (ni == 0.0 || nh == 0.0) throw Error(ErrorCode::ZeroVector, "correlation needs nonzero vectors");
  return std::clamp(dot(i, i_hat) / (ni * nh), -1.0, 1.0);
}

struct Matching {
  std::vector<std::size_t> estimate_for_source;  // source k pairs with estimate [k]
  std::vector<int> sign;                         // +1 / -1 applied to that estimate
};

inline constexpr std::size_t kExhaustiveMatchLimit = 5;

/// Pairs each source with one estimate maximizing total |rho|: exhaustive over
/// permutations up to five sources, greedy largest-|rho|-first beyond.
inline Matching match_components(std::span<const Vector> sources, std::span<const Vector> estimates) {
  const std::size_t n = sources.size();
  if (estimates.size() != n) throw Error(ErrorCode::ShapeMismatch, "source/estimate counts differ");
  Matrix rho(n, n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t e = 0; e < n; ++e) rho(k, e) = correlation(sources[k], estimates[e]);

  Matching m;
  m.estimate_for_source.resize(n);
  if (n <= kExhaustiveMatchLimit) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -1.0;
    do {
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) total += std::abs(rho(k, perm[k]));
      if (total > best) {
        best = total;
        m.estimate_for_source = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<bool> src_used(n, false), est_used(n, false);
    for (std::size_t round = 0; round < n; ++round) {
      double best = -1.0;
      std::size_t bk = 0, be = 0;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t e = 0; e < n; ++e)
          if (!src_used[k] && !est_used[e] && std::abs(rho(k, e)) > best) {
            best = std::abs(rho(k, e));
            bk = k;
            be = e;
          }
      src_used[bk] = est_used[be] = true;
      m.estimate_for_source[bk] = be;
    }
  }
  m.sign.resize(n);
  for (std::size_t k = 0; k < n; ++k) m.sign[k] = rho(k, m.estimate_for_source[k]) < 0.0 ? -1 : 1;
  return m;
}

struct SeparationScore {
  double isi = 0.0;
  double tmse = 0.0;
  std::vector<double> correlations;  // after matching and sign correction
  std::vector<double> per_source_mse;
  Matching matching;
};

/// Matches estimates to sources, applies the signs, and scores. global is
/// the overall source-to-estimate matrix W B used for ISI.
inline SeparationScore score_separation(std::span<const Vector> sources,
                                        std::span<const Vector> estimates, const Matrix& global) {
  SeparationScore score;
  score.isi = isi(global);
  score.matching = match_components(sources, estimates);
  for (std::size_t k = 0; k < sources.size(); ++k) {
    Vector est = estimates[score.matching.estimate_for_source[k]];
    if (score.matching.sign[k] < 0)
      for (double& v : est) v = -v;
    score.per_source_mse.push_back(mse(sources[k], est));
    score.correlations.push_back(correlation(sources[k], est));
  }
  score.tmse = tmse(score.per_source_mse);
  return score;
}

}  // namespace npsa
