#pragma once

// Randomized property suites over the Kronecker/vec identities, the projector
// containment behind the oblique deflation, and the equivalence of the two
// rank-one deflation routes. Each check records a pass or a failure message.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "npsa/eigensearch.hpp"
#include "npsa/linalg.hpp"
#include "npsa/tensor3.hpp"

namespace npsa {

struct SuiteReport {
  std::string name;
  std::size_t passed = 0;
  std::size_t failed = 0;
  double max_error = 0.0;  // largest measured deviation across all checks
  std::vector<std::string> failures;

  bool ok() const noexcept { return failed == 0; }

  void record(bool pass, const std::string& what) {
    if (pass) {
      ++passed;
    } else {
      ++failed;
      failures.push_back(what);
    }
  }
  void absorb(const SuiteReport& other) {
    passed += other.passed;
    failed += other.failed;
    max_error = std::max(max_error, other.max_error);
    failures.insert(failures.end(), other.failures.begin(), other.failures.end());
  }
};

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = g(rng);
  return m;
}

inline Tensor3 random_tensor(std::size_t L, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor3 t(L);
  for (double& v : t.data()) v = g(rng);
  return t;
}

/// Random combination of rank-one cubes; supersymmetric by construction.
inline Tensor3 random_supersymmetric(std::size_t L, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor3 t(L);
  for (std::size_t r = 0; r < L + 2; ++r) {
    Vector v(L);
    for (double& x : v) x = g(rng);
    accumulate_outer3(t, v, g(rng) / static_cast<double>(L));
  }
  return t;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// a * b for a narrow b: streams each column of a once.
inline Matrix multiply_narrow(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::ShapeMismatch, "multiply_narrow shapes");
  Matrix c(a.rows(), b.cols());
  for (std::size_t k = 0; k < a.cols(); ++k) {
    auto ak = a.col(k);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      auto cj = c.col(j);
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

/// Columns of m at the given indices.
inline Matrix select_columns(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(m.rows(), idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c)
    std::copy_n(m.col(idx[c]).begin(), m.rows(), out.col(c).begin());
  return out;
}

/// Every column for small n, otherwise `samples` distinct random ones.
inline std::vector<std::size_t> probe_columns(std::size_t n, std::size_t full_limit,
                                              std::size_t samples, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= full_limit) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(samples);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline constexpr std::size_t kFullProductLimit = 512;
inline constexpr std::size_t kProbeColumns = 16;
inline constexpr std::size_t kGenericRankLimit = 64;

/// Rank of an orthogonal projector: checks P = P^T everywhere and P P = P on
/// the probe columns, after which the eigenvalues are 0/1 and the rank is
/// the trace. Small matrices are also ranked by singular values and the two
/// answers must agree. Returns nullopt when P is not a projector.
inline std::optional<std::size_t> projector_rank(const Matrix& p, std::span<const std::size_t> probes,
                                                 double tol, double& worst) {
  const std::size_t n = p.rows();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) worst = std::max(worst, std::abs(p(i, j) - p(j, i)));
  const Matrix cols = select_columns(p, probes);
  const Matrix pp = multiply_narrow(p, cols);
  worst = std::max(worst, max_abs_diff(pp.data(), cols.data()));
  if (worst > tol) return std::nullopt;
  const auto by_trace = static_cast<std::size_t>(std::llround(p.trace()));
  if (n <= kGenericRankLimit && rank(p) != by_trace) return std::nullopt;
  return by_trace;
}

inline std::size_t ipow(std::size_t b, unsigned e) {
  std::size_t r = 1;
  for (unsigned i = 0; i < e; ++i) r *= b;
  return r;
}

/// All (n, m, p) with 2 <= n <= 8, 1 <= m < n, p >= 1 and n^p <= 4096.
inline std::vector<std::tuple<std::size_t, std::size_t, unsigned>> lemma_triples() {
  std::vector<std::tuple<std::size_t, std::size_t, unsigned>> out;
  for (std::size_t n = 2; n <= 8; ++n)
    for (std::size_t m = 1; m < n; ++m)
      for (unsigned p = 1; ipow(n, p) <= kLemmaSizeCap; ++p) out.emplace_back(n, m, p);
  return out;
}

/// One (n, m, p) instance: containment identity right*left = left, both rank
/// formulas and the dimension inequality.
inline SuiteReport check_lemma1_case(std::size_t n, std::size_t m, unsigned p, std::mt19937_64& rng) {
  SuiteReport rep;
  rep.name = "lemma1";
  const std::string tag =
      "(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ",p=" + std::to_string(p) + ")";
  const Matrix s = random_matrix(n, m, rng);
  const LemmaProjectors proj = lemma1_projectors(s, p);
  const std::size_t N = proj.left.rows();

  const auto probes = probe_columns(N, kFullProductLimit, kProbeColumns, rng);
  const Matrix left_cols = select_columns(proj.left, probes);
  const double fixed = max_abs_diff(multiply_narrow(proj.right, left_cols).data(), left_cols.data());
  rep.max_error = std::max(rep.max_error, fixed);
  rep.record(fixed <= 1e-10, tag + " right*left != left, max diff " + std::to_string(fixed));

  const std::size_t want_left = ipow(n - m, p);
  const std::size_t want_right = ipow(n, p) - ipow(m, p);
  double worst = 0.0;
  const auto rl = projector_rank(proj.left, probes, 1e-10, worst);
  rep.record(rl && *rl == want_left, tag + " rank(left) expected " + std::to_string(want_left));
  const auto rr = projector_rank(proj.right, probes, 1e-10, worst);
  rep.record(rr && *rr == want_right, tag + " rank(right) expected " + std::to_string(want_right));
  rep.max_error = std::max(rep.max_error, worst);
  rep.record(want_left <= want_right, tag + " (n-m)^p > n^p - m^p");
  return rep;
}

/// `cases` triples drawn uniformly (with replacement) from lemma_triples().
inline SuiteReport verify_lemma1(std::size_t cases, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "lemma1";
  std::mt19937_64 rng(seed);
  const auto triples = lemma_triples();
  std::uniform_int_distribution<std::size_t> pick(0, triples.size() - 1);
  for (std::size_t c = 0; c < cases; ++c) {
    const auto [n, m, p] = triples[pick(rng)];
    rep.absorb(check_lemma1_case(n, m, p, rng));
  }
  return rep;
}

/// Reference (materialized projector) vs improved (rank-one update)
/// deflation, L in {2..6}, elementwise tolerance 1e-12.
inline SuiteReport verify_equivalence(std::size_t cases, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "equivalence";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t L = dim(rng);
    const Tensor3 s = random_supersymmetric(L, rng);
    const Vector u = random_unit(L, rng);
    const Tensor3 ref = deflate_npsa_reference(s, u);
    const Tensor3 imp = deflate_npsa_improved(s, u);
    const double d = max_abs_diff(ref.data(), imp.data());
    rep.max_error = std::max(rep.max_error, d);
    rep.record(d < 1e-12, "L=" + std::to_string(L) + " max diff " + std::to_string(d));
  }
  return rep;
}

/// Transpose, mixed-product, rank, vec(ABC) and tensor-vec identities on
/// random shapes.
inline SuiteReport verify_kron(std::size_t cases, std::uint64_t seed) {
  SuiteReport rep;
  rep.name = "kron";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dim(1, 4);
  auto note = [&rep](double err, double tol, const std::string& what) {
    rep.max_error = std::max(rep.max_error, err);
    rep.record(err <= tol, what + " deviation " + std::to_string(err));
  };
  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t i = dim(rng), j = dim(rng), k = dim(rng), l = dim(rng), q = dim(rng);
    const Matrix a = random_matrix(i, j, rng);
    const Matrix b = random_matrix(k, l, rng);

    note(max_abs_diff(kron(a, b).transpose().data(), kron(a.transpose(), b.transpose()).data()), 1e-12,
         "transpose");

    const Matrix a2 = random_matrix(j, q, rng);
    const Matrix b2 = random_matrix(l, q, rng);
    note(max_abs_diff((kron(a, b) * kron(a2, b2)).data(), kron(a * a2, b * b2).data()), 1e-10,
         "mixed product");

    const std::size_t ra = std::min(i, j) > 1 ? std::min(i, j) - 1 : 1;
    const Matrix lowa = random_matrix(i, ra, rng) * random_matrix(ra, j, rng);
    const bool rank_ok = rank(kron(lowa, b)) == rank(lowa) * rank(b);
    rep.record(rank_ok, "rank(A (x) B) != rank(A) rank(B)");

    const Matrix x = random_matrix(j, k, rng);
    const Matrix cm = random_matrix(k, l, rng);
    note(max_abs_diff(vec(a * x * cm), kron(cm.transpose(), a) * vec(x)), 1e-10, "vec(AXC)");

    const std::size_t L = dim(rng) + 1;
    const Tensor3 t = random_tensor(L, rng);
    const Matrix f1 = random_matrix(L, L, rng), f2 = random_matrix(L, L, rng), f3 = random_matrix(L, L, rng);
    const Tensor3 lhs = n_mode_product(n_mode_product(n_mode_product(t, f1, 1), f2, 2), f3, 3);
    const Vector rhs = kron(kron(f3, f2), f1) * vec(t);
    note(max_abs_diff(vec(lhs), rhs), 1e-10, "tensor vec");
  }
  return rep;
}

}  // namespace npsa
