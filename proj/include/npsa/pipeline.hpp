#pragma once

// End-to-end workflows: whiten -> coskewness -> eigensearch -> transformed
// components, and the blind-separation scoring built on top of it.

#include <cstddef>
#include <span>
#include <vector>

#include "npsa/coskewness.hpp"
#include "npsa/eigensearch.hpp"
#include "npsa/error.hpp"
#include "npsa/linalg.hpp"
#include "npsa/metrics.hpp"
#include "npsa/whitening.hpp"

namespace npsa {

struct Extraction {
  WhiteningModel whitening;
  Tensor3 coskewness;
  SearchResult search;
  DataMatrix components;                // Y = U^T R, p x N
  std::vector<double> component_skewness;  // skew of S along each u_i
};

/// Runs the full pipeline on bands x pixels data. p is checked against the
/// retained (whitened) dimensionality.
inline Extraction extract_components(const DataMatrix& x, std::size_t p, const SearchConfig& cfg) {
  Extraction ex;
  ex.whitening = fit_whitening(x);
  if (p < 1 || p > ex.whitening.retained)
    throw Error(ErrorCode::Validation,
                "requested " + std::to_string(p) + " components but only " +
                    std::to_string(ex.whitening.retained) + " whitened dimensions are available");
  const DataMatrix r = apply_whitening(ex.whitening, x);
  ex.coskewness = build_coskewness(r);
  ex.search = run(ex.coskewness, p, cfg);
  ex.components = ex.search.U.transpose() * r;
  for (const EigenPair& pair : ex.search.pairs)
    ex.component_skewness.push_back(directional_skewness(ex.coskewness, pair.u));
  return ex;
}

/// Rows of a matrix as separate vectors.
inline std::vector<Vector> rows_of(const Matrix& m) {
  std::vector<Vector> out(m.rows(), Vector(m.cols()));
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out[i][j] = m(i, j);
  return out;
}

inline Matrix stack_rows(std::span<const Vector> rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::ShapeMismatch, "rows differ in length");
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

struct Separation {
  Extraction extraction;
  Matrix mixed;      // B S
  Matrix demixing;   // W = U^T F^T, so Y = W (X - m)
  Matrix global;     // P = W B
  Matrix estimates;  // W X: the components with the mixture mean carried through
  SeparationScore score;
};

/// Mixes sources (one per row of the result) with `mixing`, separates all of
/// them and scores the estimates against the known sources.
inline Separation separate_mixture(std::span<const Vector> sources, const Matrix& mixing,
                                   const SearchConfig& cfg) {
  if (sources.size() < 2) throw Error(ErrorCode::Validation, "need at least two sources");
  if (!mixing.is_square() || mixing.rows() != sources.size())
    throw Error(ErrorCode::ShapeMismatch, "mixing matrix must be k x k for k sources");
  Separation sep;
  const Matrix s = stack_rows(sources);
  sep.mixed = mixing * s;
  sep.extraction = extract_components(sep.mixed, sources.size(), cfg);
  sep.demixing = sep.extraction.search.U.transpose() * sep.extraction.whitening.operator_F.transpose();
  sep.global = sep.demixing * mixing;
  sep.estimates = sep.demixing * sep.mixed;
  sep.score = score_separation(sources, rows_of(sep.estimates), sep.global);
  return sep;
}

}  // namespace npsa
