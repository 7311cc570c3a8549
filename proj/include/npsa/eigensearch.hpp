#pragma once

// Tensor eigenpair search for principal skewness directions.
//
// A direction u is an eigenvector of the coskewness tensor S when
// S x_1 u x_3 u = lambda u; lambda is then the skewness along u. Directions
// are found one at a time by a normalized fixed-point iteration, and the
// working tensor is deflated after each one so the next search does not
// return to it. Two deflation families are provided:
//
//   * orthogonal (PSA): S <- S x_1 P x_2 P x_3 P with P = I - u u^T, which
//     forces every later direction into the orthogonal complement of u;
//   * rank-one removal (NPSA): vec(S) <- P' vec(S) with P' the complement
//     projector of u (x) u (x) u in R^{L^3}. Only the u^{(x)3} component is
//     removed, so later directions may be oblique to u. Available as the
//     literal L^3 x L^3 projector ("reference") and the O(L^3) update
//     S - S x_1 uu^T x_2 uu^T x_3 uu^T ("improved").

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"
#include "npsa/tensor3.hpp"

namespace npsa {

enum class Strategy { PSA, NPSAReference, NPSAImproved };

constexpr std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::PSA: return "psa";
    case Strategy::NPSAReference: return "npsa-reference";
    case Strategy::NPSAImproved: return "npsa";
  }
  return "unknown";
}

inline Strategy parse_strategy(std::string_view name) {
  if (name == "psa") return Strategy::PSA;
  if (name == "npsa" || name == "npsa-improved") return Strategy::NPSAImproved;
  if (name == "npsa-reference") return Strategy::NPSAReference;
  throw Error(ErrorCode::Validation, "unknown strategy '" + std::string(name) + "'");
}

struct SearchConfig {
  double epsilon = 1e-4;  // stop when 1 - |<u_{k+1}, u_k>| < epsilon
  int max_iters = 50;
  int restarts = 1;  // random starts per component; the largest lambda wins
  std::uint64_t rng_seed = 0;
  Strategy strategy = Strategy::NPSAImproved;
  std::size_t reference_cap = 12;  // largest L the reference deflation accepts

  void validate() const {
    if (!(epsilon > 0.0)) throw Error(ErrorCode::Validation, "epsilon must be positive");
    if (max_iters < 1) throw Error(ErrorCode::Validation, "max_iters must be at least 1");
    if (restarts < 1) throw Error(ErrorCode::Validation, "restarts must be at least 1");
  }
};

struct EigenPair {
  Vector u;             // unit, sign chosen so lambda >= 0
  double lambda = 0.0;  // skewness of the tensor it was found in, along u
  int iterations = 0;
  bool converged = false;
  // Fixed-point search: final 1 - |<u_{k+1}, u_k>|.
  // Brute-force oracle: ||S x_1 u x_3 u - lambda u||_2.
  double residual = 0.0;
};

/// ||t x_1 u x_3 u - lambda u||_2.
inline double eigen_residual(const Tensor3& t, std::span<const double> u, double lambda) {
  Vector v = contract_13(t, u);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lambda * u[i];
  return norm2(v);
}

inline Vector random_unit(std::size_t L, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Vector u(L);
    for (double& x : u) x = gauss(rng);
    if (norm2(u) > 1e-12) return normalized(u);
  }
}

/// u <- normalize(S x_1 u x_3 u) until the step metric drops below epsilon or
/// max_iters is reached. Non-convergence is reported, not thrown.
inline EigenPair fixed_point(const Tensor3& s, std::span<const double> u0,
                             const SearchConfig& cfg) {
  cfg.validate();
  if (u0.size() != s.dim()) throw Error(ErrorCode::ShapeMismatch, "start vector length");
  require_unit(u0, "fixed_point");

  const double floor = 1e-12 * s.frobenius();
  EigenPair pair;
  Vector u(u0.begin(), u0.end());
  double step = 1.0;
  int k = 0;
  while (k < cfg.max_iters) {
    Vector v = contract_13(s, u);
    const double nv = norm2(v);
    if (!(nv > floor) || nv == 0.0)
      throw Error(ErrorCode::ZeroContraction,
                  "S x1 u x3 u vanished; the tensor is (numerically) zero along this direction");
    for (double& x : v) x /= nv;
    step = 1.0 - std::abs(dot(v, u));
    u = std::move(v);
    ++k;
    if (step < cfg.epsilon) {
      pair.converged = true;
      break;
    }
  }
  double lambda = cubic_form(s, u);
  if (lambda < 0.0) {
    for (double& x : u) x = -x;
    lambda = -lambda;
  }
  pair.u = std::move(u);
  pair.lambda = lambda;
  pair.iterations = k;
  pair.residual = step;
  return pair;
}

/// cfg.restarts random starts drawn from rng; keeps the largest lambda.
inline EigenPair search_component(const Tensor3& s, const SearchConfig& cfg, std::mt19937_64& rng) {
  cfg.validate();
  std::optional<EigenPair> best;
  std::optional<Error> last_error;
  for (int r = 0; r < cfg.restarts; ++r) {
    const Vector u0 = random_unit(s.dim(), rng);
    try {
      EigenPair p = fixed_point(s, u0, cfg);
      if (!best || p.lambda > best->lambda) best = std::move(p);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroContraction) throw;
      last_error = e;
    }
  }
  if (!best) throw *last_error;
  return *best;
}

// ---- deflation ------------------------------------------------------------

/// S x_1 P x_2 P x_3 P with P = I - u u^T. Every single-mode contraction of
/// the result against u vanishes.
inline Tensor3 deflate_psa(const Tensor3& s, std::span<const double> u) {
  if (u.size() != s.dim()) throw Error(ErrorCode::ShapeMismatch, "direction length");
  require_unit(u, "deflate_psa");
  const Matrix p = Matrix::identity(s.dim()) - outer(u, u);
  return n_mode_product(n_mode_product(n_mode_product(s, p, 1), p, 2), p, 3);
}

/// unvec(P vec(S)) with P = I - w (w^T w)^{-1} w^T and w = u (x) u (x) u,
/// materialized as an L^3 x L^3 matrix. Throws DimensionTooLarge above cap.
inline Tensor3 deflate_npsa_reference(const Tensor3& s, std::span<const double> u,
                                      std::size_t cap = 12) {
  const std::size_t L = s.dim();
  if (u.size() != L) throw Error(ErrorCode::ShapeMismatch, "direction length");
  require_unit(u, "deflate_npsa_reference");
  if (L > cap)
    throw Error(ErrorCode::DimensionTooLarge,
                "reference deflation materializes L^6 entries; L=" + std::to_string(L) +
                    " exceeds cap " + std::to_string(cap));
  const Vector w = kron_power(u, 3);
  const Matrix projector = proj_complement(Matrix::column(w));
  return unvec(projector * vec(s), L);
}

/// S - S x_1 uu^T x_2 uu^T x_3 uu^T. The triple product collapses to
/// (S x_1 u x_2 u x_3 u) u o u o u, so the update is one cubic form and one
/// rank-one subtraction: O(L^3) time, no extra storage.
inline Tensor3 deflate_npsa_improved(const Tensor3& s, std::span<const double> u) {
  const std::size_t L = s.dim();
  if (u.size() != L) throw Error(ErrorCode::ShapeMismatch, "direction length");
  require_unit(u, "deflate_npsa_improved");
  Tensor3 out = s;
  accumulate_outer3(out, u, -cubic_form(s, u));
  return out;
}

inline Tensor3 deflate(const Tensor3& s, std::span<const double> u, const SearchConfig& cfg) {
  switch (cfg.strategy) {
    case Strategy::PSA: return deflate_psa(s, u);
    case Strategy::NPSAReference: return deflate_npsa_reference(s, u, cfg.reference_cap);
    case Strategy::NPSAImproved: return deflate_npsa_improved(s, u);
  }
  throw Error(ErrorCode::Validation, "unknown strategy");
}

struct SearchResult {
  std::vector<EigenPair> pairs;
  Matrix U;  // L x p, column i is pairs[i].u

  bool all_converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const EigenPair& p) { return p.converged; });
  }
};

/// Extracts p directions in sequence, deflating a private copy of s after each
/// per cfg.strategy. Starts come from one generator seeded with cfg.rng_seed,
/// fresh for every component. A component that hits max_iters keeps its last
/// iterate and is still used for deflation.
inline SearchResult run(const Tensor3& s, std::size_t p, const SearchConfig& cfg) {
  cfg.validate();
  const std::size_t L = s.dim();
  if (p < 1 || p > L)
    throw Error(ErrorCode::Validation,
                "component count p=" + std::to_string(p) + " must lie in [1, " + std::to_string(L) + "]");

  std::mt19937_64 rng(cfg.rng_seed);
  Tensor3 work = s;
  SearchResult result;
  result.U = Matrix(L, p);
  for (std::size_t i = 0; i < p; ++i) {
    EigenPair pair = search_component(work, cfg, rng);
    std::copy(pair.u.begin(), pair.u.end(), result.U.col(i).begin());
    if (i + 1 < p) work = deflate(work, pair.u, cfg);
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

// ---- brute-force oracle ---------------------------------------------------

struct BruteForceOptions {
  // Keep only directions where the skewness has a strict local maximum on the
  // unit sphere (the stable points of the fixed-point map). Otherwise every
  // stationary direction with positive lambda is returned.
  bool local_maxima_only = true;
  double residual_bound = 1e-6;
  double dedup_radians = 0.01;
};

namespace detail {

// Jacobian of u -> S x_1 u x_3 u: entry (j, m) = sum_k t(m,j,k) u_k + sum_i t(i,j,m) u_i.
inline Matrix contraction_jacobian(const Tensor3& t, std::span<const double> u) {
  const std::size_t L = t.dim();
  Matrix jac(L, L);
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t m = 0; m < L; ++m) {
      double a = 0.0;
      for (std::size_t k = 0; k < L; ++k) a += t(m, j, k) * u[k];
      for (std::size_t i = 0; i < L; ++i) a += t(i, j, m) * u[i];
      jac(j, m) = a;
    }
  return jac;
}

// Newton on [S(u,u) - lambda u; (1 - u^T u) / 2] = 0. Converges to saddles and
// minima as readily as to maxima, which a fixed-point polish would not.
inline std::optional<std::pair<Vector, double>> newton_polish(const Tensor3& t, Vector u) {
  const std::size_t L = t.dim();
  double lambda = cubic_form(t, u);
  for (int it = 0; it < 60; ++it) {
    Vector v = contract_13(t, u);
    Vector f(L + 1);
    for (std::size_t i = 0; i < L; ++i) f[i] = v[i] - lambda * u[i];
    f[L] = 0.5 * (1.0 - dot(u, u));
    if (norm2(f) < 1e-15 * std::max(1.0, t.max_abs())) break;

    Matrix jac(L + 1, L + 1);
    const Matrix dv = contraction_jacobian(t, u);
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t m = 0; m < L; ++m) jac(j, m) = dv(j, m) - (j == m ? lambda : 0.0);
      jac(j, L) = -u[j];
      jac(L, j) = -u[j];
    }
    for (double& x : f) x = -x;
    Vector step;
    try {
      step = solve_linear(jac, f);
    } catch (const Error&) {
      return std::nullopt;
    }
    for (std::size_t i = 0; i < L; ++i) u[i] += step[i];
    lambda += step[L];
  }
  if (norm2(u) < 0.5) return std::nullopt;
  u = normalized(u);
  return std::pair{u, cubic_form(t, u)};
}

// Orthonormal basis of the tangent space at unit u (L columns minus one).
inline Matrix tangent_basis(std::span<const double> u) {
  const std::size_t L = u.size();
  const SymEig e = sym_eig(Matrix::identity(L) - outer(u, u));
  Matrix basis(L, L - 1);
  for (std::size_t c = 0; c + 1 < L; ++c)
    std::copy_n(e.vectors.col(c).begin(), L, basis.col(c).begin());
  return basis;
}

// Riemannian Hessian of the cubic form on the sphere is 3 P (2 M - lambda I) P,
// M = symmetric part of t x_1 u.
inline bool is_strict_local_max(const Tensor3& t, std::span<const double> u, double lambda) {
  const Matrix m = contract_1(t, u);
  const std::size_t L = u.size();
  Matrix h(L, L);
  for (std::size_t j = 0; j < L; ++j)
    for (std::size_t i = 0; i < L; ++i) h(i, j) = m(i, j) + m(j, i) - (i == j ? lambda : 0.0);
  const Matrix tb = tangent_basis(u);
  const Matrix reduced = tb.transpose() * h * tb;
  const SymEig e = sym_eig(0.5 * (reduced + reduced.transpose()));
  return e.values.front() < -1e-9 * std::max(1.0, t.max_abs());
}

}  // namespace detail

/// Enumerates eigenpairs of a 2x2x2 or 3x3x3 tensor by scanning the circle
/// (grid angles) or sphere (grid x grid/2 angles) for local minima of the
/// eigen-equation residual and polishing each with Newton's method. Pairs are
/// sign-fixed (lambda > 0), deduplicated, and sorted by lambda descending.
inline std::vector<EigenPair> brute_force_eigenpairs(const Tensor3& s, std::size_t grid,
                                                     const BruteForceOptions& opt = {}) {
  const std::size_t L = s.dim();
  if (L != 2 && L != 3)
    throw Error(ErrorCode::UnsupportedDimension, "brute-force oracle supports L = 2 or 3 only");
  if (grid < 360) throw Error(ErrorCode::Validation, "grid must be at least 360");

  auto residual_at = [&](std::span<const double> u) {
    return eigen_residual(s, u, cubic_form(s, u));
  };

  std::vector<Vector> candidates;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (L == 2) {
    std::vector<double> res(grid);
    std::vector<Vector> pts(grid);
    for (std::size_t i = 0; i < grid; ++i) {
      const double th = two_pi * static_cast<double>(i) / static_cast<double>(grid);
      pts[i] = {std::cos(th), std::sin(th)};
      res[i] = residual_at(pts[i]);
    }
    for (std::size_t i = 0; i < grid; ++i)
      if (res[i] <= res[(i + grid - 1) % grid] && res[i] <= res[(i + 1) % grid])
        candidates.push_back(pts[i]);
  } else {
    const std::size_t rows = grid / 2;
    auto point = [&](std::size_t a, std::size_t b) {
      const double th = std::numbers::pi * (static_cast<double>(a) + 0.5) / static_cast<double>(rows);
      const double ph = two_pi * static_cast<double>(b) / static_cast<double>(grid);
      return Vector{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)};
    };
    std::vector<double> res(rows * grid);
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t b = 0; b < grid; ++b) res[a * grid + b] = residual_at(point(a, b));
    for (std::size_t a = 0; a < rows; ++a)
      for (std::size_t b = 0; b < grid; ++b) {
        const double r = res[a * grid + b];
        bool minimum = true;
        for (int da = -1; da <= 1 && minimum; ++da)
          for (int db = -1; db <= 1; ++db) {
            if (da == 0 && db == 0) continue;
            const long aa = static_cast<long>(a) + da;
            if (aa < 0 || aa >= static_cast<long>(rows)) continue;
            const std::size_t bb = (b + grid + static_cast<std::size_t>(db + 1) - 1) % grid;
            if (res[static_cast<std::size_t>(aa) * grid + bb] < r) {
              minimum = false;
              break;
            }
          }
        if (minimum) candidates.push_back(point(a, b));
      }
  }

  const double lambda_floor = 1e-9 * std::max(s.frobenius(), 1e-300);
  std::vector<EigenPair> found;
  for (const Vector& c : candidates) {
    auto polished = detail::newton_polish(s, c);
    if (!polished) continue;
    auto [u, lambda] = *polished;
    if (lambda < 0.0) {
      for (double& x : u) x = -x;
      lambda = -lambda;
    }
    if (!(lambda > lambda_floor)) continue;
    const double res = eigen_residual(s, u, lambda);
    if (!(res < opt.residual_bound)) continue;
    if (opt.local_maxima_only && !detail::is_strict_local_max(s, u, lambda)) continue;
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const EigenPair& p) {
      return std::acos(std::clamp(dot(p.u, u), -1.0, 1.0)) < opt.dedup_radians;
    });
    if (duplicate) continue;
    found.push_back(EigenPair{u, lambda, 0, true, res});
  }
  std::sort(found.begin(), found.end(),
            [](const EigenPair& a, const EigenPair& b) { return a.lambda > b.lambda; });
  return found;
}

// ---- projector pair behind the search-space containment -------------------

inline constexpr std::size_t kLemmaSizeCap = 4096;

struct LemmaProjectors {
  Matrix left;   // (P_S)^{(x)p}, P_S = I - S (S^T S)^{-1} S^T
  Matrix right;  // complement projector of S^{(x)p} in R^{n^p}
  bool right_from_direct_formula = false;
};

/// Builds (P_S)^{(x)p} and the complement projector of S^{(x)p}. When the
/// Kronecker power is small (n^p <= 512, m^p <= 64) the right projector comes
/// straight from the Gram formula applied to S^{(x)p}; otherwise from
/// I - Q^{(x)p} with Q = I - P_S.
inline LemmaProjectors lemma1_projectors(const Matrix& s, unsigned p) {
  if (p < 1) throw Error(ErrorCode::Validation, "p must be at least 1");
  const std::size_t n = s.rows();
  const std::size_t m = s.cols();
  std::size_t big = 1, small = 1;
  for (unsigned i = 0; i < p; ++i) {
    big *= n;
    small *= m;
    if (big > kLemmaSizeCap)
      throw Error(ErrorCode::DimensionTooLarge, "n^p exceeds " + std::to_string(kLemmaSizeCap));
  }

  const Matrix ps = proj_complement(s);
  LemmaProjectors out;
  out.left = kron_power(ps, p);
  if (big <= 512 && small <= 64) {
    out.right = proj_complement(kron_power(s, p));
    out.right_from_direct_formula = true;
  } else {
    Matrix qp = kron_power(Matrix::identity(n) - ps, p);
    qp *= -1.0;
    for (std::size_t i = 0; i < big; ++i) qp(i, i) += 1.0;
    out.right = std::move(qp);
  }
  return out;
}

}  // namespace npsa
