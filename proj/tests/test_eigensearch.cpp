#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "npsa/eigensearch.hpp"
#include "npsa/verify.hpp"

using namespace npsa;

namespace {

Tensor3 golden() {
  const std::vector<Matrix> slices{Matrix::from_rows({{2.0, -1.0}, {-1.0, 0.8}}),
                                   Matrix::from_rows({{-1.0, 0.8}, {0.8, 0.3}})};
  return Tensor3::from_slices(slices);
}

SearchConfig precise(Strategy st) {
  SearchConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 10000;
  cfg.restarts = 16;
  cfg.strategy = st;
  return cfg;
}

void expect_up_to_sign(std::span<const double> u, std::span<const double> want, double tol) {
  const double s = dot(u, want) < 0.0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(s * u[i], want[i], tol) << "component " << i;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Validation;
}

// The unit vector in the plane that maximizes the cubic form, by dense scan.
Vector scan_argmax_2d(const Tensor3& t) {
  Vector best{1.0, 0.0};
  double best_val = -1e300;
  for (int k = 0; k < 200000; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 200000.0;
    const Vector u{std::cos(th), std::sin(th)};
    const double v = cubic_form(t, u);
    if (v > best_val) {
      best_val = v;
      best = u;
    }
  }
  return best;
}

}  // namespace

TEST(Strategy, NamesRoundTrip) {
  for (Strategy st : {Strategy::PSA, Strategy::NPSAReference, Strategy::NPSAImproved})
    EXPECT_EQ(parse_strategy(to_string(st)), st);
  EXPECT_EQ(parse_strategy("npsa-improved"), Strategy::NPSAImproved);
  EXPECT_THROW(parse_strategy("ica"), Error);
}

TEST(SearchConfig, Validation) {
  SearchConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(FixedPoint, GoldenFirstPairIsGlobalMaximum) {
  std::mt19937_64 rng(0);
  const EigenPair p = search_component(golden(), precise(Strategy::PSA), rng);
  expect_up_to_sign(p.u, Vector{0.8812, -0.4727}, 1e-3);
  expect_up_to_sign(p.u, scan_argmax_2d(golden()), 1e-4);
  EXPECT_TRUE(p.converged);
  EXPECT_GE(p.lambda, 0.0);
  EXPECT_LE(eigen_residual(golden(), p.u, p.lambda), 1e-3);
}

TEST(FixedPoint, ZeroTensorThrowsZeroContraction) {
  EXPECT_EQ(code_of([] { fixed_point(Tensor3(3), Vector{1, 0, 0}, SearchConfig{}); }),
            ErrorCode::ZeroContraction);
  std::mt19937_64 rng(1);
  EXPECT_EQ(code_of([&] { search_component(Tensor3(2), SearchConfig{}, rng); }), ErrorCode::ZeroContraction);
}

TEST(FixedPoint, RejectsNonUnitStart) {
  EXPECT_EQ(code_of([] { fixed_point(golden(), Vector{1, 1}, SearchConfig{}); }), ErrorCode::NotUnit);
}

TEST(FixedPoint, SignConventionAndIterationCap) {
  SearchConfig cfg;
  cfg.max_iters = 1;
  cfg.epsilon = 1e-15;
  const EigenPair p = fixed_point(golden(), normalized(Vector{-1.0, -0.2}), cfg);
  EXPECT_FALSE(p.converged);
  EXPECT_EQ(p.iterations, 1);
  EXPECT_GE(p.lambda, 0.0);
  EXPECT_NEAR(norm2(p.u), 1.0, 1e-12);
}

TEST(Deflation, GoldenSecondVectors) {
  std::mt19937_64 rng(0);
  const Vector u1 = search_component(golden(), precise(Strategy::PSA), rng).u;

  const EigenPair psa = search_component(deflate_psa(golden(), u1), precise(Strategy::PSA), rng);
  expect_up_to_sign(psa.u, Vector{0.4727, 0.8812}, 1e-3);
  EXPECT_NEAR(std::abs(dot(psa.u, u1)), 0.0, 1e-9);

  const EigenPair npsa = search_component(deflate_npsa_improved(golden(), u1), precise(Strategy::NPSAImproved), rng);
  expect_up_to_sign(npsa.u, Vector{0.3351, 0.9422}, 1e-3);
}

TEST(Deflation, PsaAnnihilatesDirectionInEveryMode) {
  std::mt19937_64 rng(2);
  for (std::size_t L = 2; L <= 6; ++L) {
    const Tensor3 s = random_supersymmetric(L, rng);
    const Vector u = random_unit(L, rng);
    const Tensor3 d = deflate_psa(s, u);
    for (std::size_t j = 0; j < L; ++j)
      for (std::size_t k = 0; k < L; ++k) {
        double m1 = 0.0, m2 = 0.0, m3 = 0.0;
        for (std::size_t i = 0; i < L; ++i) {
          m1 += d(i, j, k) * u[i];
          m2 += d(j, i, k) * u[i];
          m3 += d(j, k, i) * u[i];
        }
        EXPECT_NEAR(m1, 0.0, 1e-10);
        EXPECT_NEAR(m2, 0.0, 1e-10);
        EXPECT_NEAR(m3, 0.0, 1e-10);
      }
  }
}

TEST(Deflation, NpsaRemovesOnlyTheRankOneComponent) {
  std::mt19937_64 rng(3);
  for (std::size_t L = 2; L <= 6; ++L) {
    const Tensor3 s = random_supersymmetric(L, rng);
    const Vector u = random_unit(L, rng);
    const Tensor3 d = deflate_npsa_improved(s, u);
    EXPECT_NEAR(dot(vec(d), kron_power(u, 3)), 0.0, 1e-12);
    EXPECT_GT(contract_1(d, u).max_abs(), 1e-6);
    EXPECT_TRUE(d.is_supersymmetric());
  }
}

TEST(Deflation, StrategiesAgree) {
  std::mt19937_64 rng(4);
  for (int c = 0; c < 30; ++c) {
    const std::size_t L = 2 + c % 5;
    const Tensor3 s = random_supersymmetric(L, rng);
    const Vector u = random_unit(L, rng);
    const Tensor3 improved = deflate_npsa_improved(s, u);
    EXPECT_LE(max_abs_diff(deflate_npsa_reference(s, u).data(), improved.data()), 1e-12);
    const Matrix q = outer(u, u);
    const Tensor3 via_modes = s - n_mode_product(n_mode_product(n_mode_product(s, q, 1), q, 2), q, 3);
    EXPECT_LE(max_abs_diff(via_modes.data(), improved.data()), 1e-12);
  }
}

TEST(Deflation, ReferenceCapAndInputChecks) {
  const Tensor3 s(13);
  Vector u(13, 0.0);
  u[0] = 1.0;
  EXPECT_EQ(code_of([&] { deflate_npsa_reference(s, u); }), ErrorCode::DimensionTooLarge);
  EXPECT_EQ(code_of([&] { deflate_psa(golden(), Vector{1, 1}); }), ErrorCode::NotUnit);
  EXPECT_EQ(code_of([&] { deflate_npsa_improved(golden(), Vector{1, 0, 0}); }), ErrorCode::ShapeMismatch);
}

TEST(Run, ValidatesComponentCount) {
  EXPECT_EQ(code_of([] { run(golden(), 0, SearchConfig{}); }), ErrorCode::Validation);
  EXPECT_EQ(code_of([] { run(golden(), 3, SearchConfig{}); }), ErrorCode::Validation);
}

TEST(Run, DeterministicForSeedAndLeavesInputUntouched) {
  std::mt19937_64 rng(5);
  const Tensor3 s = random_supersymmetric(5, rng);
  const Tensor3 copy = s;
  SearchConfig cfg;
  cfg.rng_seed = 42;
  const SearchResult a = run(s, 5, cfg);
  const SearchResult b = run(s, 5, cfg);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(s, copy);
}

TEST(Run, PsaAndNpsaShareFirstComponent) {
  std::mt19937_64 rng(6);
  const Tensor3 s = random_supersymmetric(4, rng);
  SearchConfig psa;
  psa.strategy = Strategy::PSA;
  SearchConfig npsa;
  const SearchResult a = run(s, 1, psa), b = run(s, 1, npsa);
  EXPECT_EQ(a.U, b.U);
}

TEST(Run, PsaDirectionsAreOrthonormal) {
  std::mt19937_64 rng(7);
  const Tensor3 s = random_supersymmetric(5, rng);
  SearchConfig cfg = precise(Strategy::PSA);
  cfg.restarts = 4;
  const SearchResult r = run(s, 4, cfg);
  const Matrix g = r.U.transpose() * r.U;
  EXPECT_LE(max_abs_diff(g.data(), Matrix::identity(4).data()), 1e-6);
}

TEST(Run, NpsaNeverRepeatsADirection) {
  std::mt19937_64 rng(8);
  for (int c = 0; c < 20; ++c) {
    const std::size_t L = 2 + c % 5;
    const Tensor3 s = random_supersymmetric(L, rng);
    SearchConfig cfg;
    cfg.rng_seed = static_cast<std::uint64_t>(c);
    const SearchResult r = run(s, L, cfg);
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = i + 1; j < L; ++j)
        EXPECT_GE(std::acos(std::min(1.0, std::abs(dot(r.U.col(i), r.U.col(j))))), 0.01)
            << "L=" << L << " pairs " << i << "," << j;
  }
}

TEST(Run, ConvergedPairsSatisfyResidualBound) {
  std::mt19937_64 rng(9);
  for (Strategy st : {Strategy::PSA, Strategy::NPSAReference, Strategy::NPSAImproved})
    for (int c = 0; c < 10; ++c) {
      const std::size_t L = 2 + c % 4;
      const Tensor3 s = random_supersymmetric(L, rng);
      SearchConfig cfg = precise(st);
      cfg.restarts = 2;
      const SearchResult r = run(s, L, cfg);
      Tensor3 work = s;
      for (std::size_t i = 0; i < L; ++i) {
        const EigenPair& p = r.pairs[i];
        EXPECT_GE(p.lambda, 0.0);
        EXPECT_NEAR(norm2(p.u), 1.0, 1e-8);
        if (p.converged) {
          EXPECT_LE(eigen_residual(work, p.u, p.lambda), 1e-3);
        }
        work = deflate(work, p.u, cfg);
      }
    }
}

TEST(BruteForce, GoldenLocalMaxima) {
  const auto pairs = brute_force_eigenpairs(golden(), 3600);
  ASSERT_EQ(pairs.size(), 2u);
  expect_up_to_sign(pairs[0].u, Vector{0.8812, -0.4727}, 1e-3);
  expect_up_to_sign(pairs[1].u, Vector{0.3757, 0.9267}, 1e-3);
  EXPECT_NEAR(dot(pairs[0].u, pairs[1].u), -0.1070, 1e-3);
  for (const auto& p : pairs) EXPECT_LE(eigen_residual(golden(), p.u, p.lambda), 1e-10);
}

TEST(BruteForce, AllStationaryDirectionsIncludeASaddle) {
  BruteForceOptions opt;
  opt.local_maxima_only = false;
  const auto pairs = brute_force_eigenpairs(golden(), 3600, opt);
  ASSERT_EQ(pairs.size(), 3u);
  expect_up_to_sign(pairs[2].u, Vector{0.726979, 0.686660}, 1e-5);
  EXPECT_NEAR(pairs[2].lambda, 0.599499, 1e-5);
}

TEST(BruteForce, ThreeDimensionalDiagonalTensor) {
  Tensor3 t(3);
  t(0, 0, 0) = 3.0;
  t(1, 1, 1) = 2.0;
  t(2, 2, 2) = 1.0;
  const auto pairs = brute_force_eigenpairs(t, 720);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_NEAR(pairs[0].lambda, 3.0, 1e-9);
  EXPECT_NEAR(pairs[1].lambda, 2.0, 1e-9);
  EXPECT_NEAR(pairs[2].lambda, 1.0, 1e-9);
  expect_up_to_sign(pairs[2].u, Vector{0, 0, 1}, 1e-9);
}

TEST(BruteForce, RejectsUnsupportedInput) {
  EXPECT_EQ(code_of([] { brute_force_eigenpairs(Tensor3(4), 3600); }), ErrorCode::UnsupportedDimension);
  EXPECT_EQ(code_of([] { brute_force_eigenpairs(golden(), 100); }), ErrorCode::Validation);
}

TEST(ProjectorContainment, SmallCasesAgreeAcrossRoutes) {
  std::mt19937_64 rng(10);
  for (std::size_t n = 2; n <= 4; ++n)
    for (std::size_t m = 1; m < n; ++m)
      for (unsigned p = 1; p <= 3; ++p) {
        const Matrix s = random_matrix(n, m, rng);
        const LemmaProjectors pr = lemma1_projectors(s, p);
        ASSERT_TRUE(pr.right_from_direct_formula);
        Matrix other = kron_power(Matrix::identity(n) - proj_complement(s), p);
        other *= -1.0;
        for (std::size_t i = 0; i < other.rows(); ++i) other(i, i) += 1.0;
        EXPECT_LE(max_abs_diff(pr.right.data(), other.data()), 1e-10);
        EXPECT_EQ(rank(pr.left), ipow(n - m, p));
        EXPECT_EQ(rank(pr.right), ipow(n, p) - ipow(m, p));
        EXPECT_LE(max_abs_diff((pr.right * pr.left).data(), pr.left.data()), 1e-10);
      }
}

TEST(ProjectorContainment, RankOneTensorLevelContainment) {
  std::mt19937_64 rng(11);
  const Vector u = random_unit(3, rng);
  const LemmaProjectors pr = lemma1_projectors(Matrix::column(u), 3);
  EXPECT_EQ(pr.left.rows(), 27u);
  EXPECT_LE(max_abs_diff((pr.right * pr.left).data(), pr.left.data()), 1e-12);
  EXPECT_NEAR(pr.left.trace(), 8.0, 1e-10);
  EXPECT_NEAR(pr.right.trace(), 26.0, 1e-10);
}

TEST(ProjectorContainment, InequalityForSmallDimensions) {
  for (std::size_t n = 1; n <= 10; ++n)
    for (std::size_t m = 1; m <= n; ++m)
      for (unsigned p = 1; p <= 4; ++p) EXPECT_LE(ipow(n - m, p), ipow(n, p) - ipow(m, p));
}

TEST(ProjectorContainment, RejectsOversizedPowers) {
  std::mt19937_64 rng(12);
  EXPECT_EQ(code_of([&] { lemma1_projectors(random_matrix(9, 2, rng), 4); }), ErrorCode::DimensionTooLarge);
  EXPECT_EQ(code_of([&] { lemma1_projectors(random_matrix(3, 2, rng), 0); }), ErrorCode::Validation);
}

TEST(Suites, AllPassOnFixedSeeds) {
  EXPECT_TRUE(verify_kron(30, 3).ok());
  EXPECT_TRUE(verify_equivalence(30, 3).ok());
  const auto triples = lemma_triples();
  EXPECT_EQ(triples.size(), 136u);
  std::mt19937_64 rng(3);
  SuiteReport small;
  for (const auto& [n, m, p] : triples)
    if (ipow(n, p) <= 512) small.absorb(check_lemma1_case(n, m, p, rng));
  EXPECT_TRUE(small.ok()) << (small.failures.empty() ? "" : small.failures.front());
}
