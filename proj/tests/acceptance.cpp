// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "npsa/npsa.hpp"

using namespace npsa;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

const Tensor3& golden_tensor() {
  static const Tensor3 t = [] {
    const std::vector<Matrix> slices{Matrix::from_rows({{2.0, -1.0}, {-1.0, 0.8}}),
                                     Matrix::from_rows({{-1.0, 0.8}, {0.8, 0.3}})};
    return Tensor3::from_slices(slices);
  }();
  return t;
}

SearchConfig golden_config(Strategy st) {
  SearchConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 10000;
  cfg.restarts = 16;
  cfg.strategy = st;
  return cfg;
}

// Elementwise match up to a global sign.
bool matches_up_to_sign(std::span<const double> u, std::span<const double> want, double tol) {
  bool plus = true, minus = true;
  for (std::size_t i = 0; i < u.size(); ++i) {
    plus = plus && std::abs(u[i] - want[i]) <= tol;
    minus = minus && std::abs(u[i] + want[i]) <= tol;
  }
  return plus || minus;
}

// Every pair a search produced, with the tensor it was found in.
struct FoundPair {
  EigenPair pair;
  Tensor3 tensor;
  std::string where;
};
std::vector<FoundPair> g_found;

void collect(const Tensor3& s, const SearchResult& res, const SearchConfig& cfg, const std::string& where) {
  Tensor3 working = s;
  for (std::size_t i = 0; i < res.pairs.size(); ++i) {
    g_found.push_back({res.pairs[i], working, where + " #" + std::to_string(i + 1)});
    if (i + 1 < res.pairs.size()) working = deflate(working, res.pairs[i].u, cfg);
  }
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<EigenPair> g_oracle;

Outcome golden_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  g_oracle = brute_force_eigenpairs(golden_tensor(), 3600);
  const double secs = seconds_since(t0);
  if (g_oracle.size() != 2) return {false, "oracle returned " + std::to_string(g_oracle.size()) + " pairs"};
  const Vector u1{0.8812, -0.4727}, u2{0.3757, 0.9267};
  const double ip = dot(g_oracle[0].u, g_oracle[1].u);
  o.pass = matches_up_to_sign(g_oracle[0].u, u1, 1e-3) && matches_up_to_sign(g_oracle[1].u, u2, 1e-3) &&
           std::abs(std::abs(ip) - 0.1070) <= 1e-3 && ip < 0.0 && secs < 1.0;
  o.detail = "u1=[" + fmt("%.4f", g_oracle[0].u[0]) + "," + fmt("%.4f", g_oracle[0].u[1]) + "] u2=[" +
             fmt("%.4f", g_oracle[1].u[0]) + "," + fmt("%.4f", g_oracle[1].u[1]) + "] <u1,u2>=" +
             fmt("%.4f", ip) + " time=" + fmt("%.3fs", secs);
  return o;
}

Outcome golden_deflation() {
  if (g_oracle.size() != 2) return {false, "oracle unavailable"};
  const auto t0 = Clock::now();
  Outcome o;
  struct Want {
    Strategy st;
    Vector u2;
    double angle;
  };
  for (const Want& w : {Want{Strategy::PSA, {0.4727, 0.8812}, 6.1430}, Want{Strategy::NPSAImproved, {0.3351, 0.9422}, 2.4874}}) {
    const SearchConfig cfg = golden_config(w.st);
    const SearchResult res = run(golden_tensor(), 2, cfg);
    collect(golden_tensor(), res, cfg, "golden " + std::string(to_string(w.st)));
    const double ang = unsigned_angle_deg(res.pairs[1].u, g_oracle[1].u);
    const bool ok = matches_up_to_sign(res.pairs[1].u, w.u2, 1e-3) && std::abs(ang - w.angle) <= 0.05;
    o.pass = o.pass && ok;
    o.detail += std::string(to_string(w.st)) + " u2=[" + fmt("%.4f", res.pairs[1].u[0]) + "," +
                fmt("%.4f", res.pairs[1].u[1]) + "] angle=" + fmt("%.4f", ang) + " (want " +
                fmt("%.4f", w.angle) + "); ";
  }
  const double secs = seconds_since(t0);
  o.pass = o.pass && secs < 1.0;
  o.detail += "time=" + fmt("%.3fs", secs);
  return o;
}

Outcome suite_outcome(const SuiteReport& r, double secs, double budget) {
  Outcome o;
  o.pass = r.ok() && r.passed > 0 && secs < budget;
  o.detail = std::to_string(r.passed) + " checks passed, " + std::to_string(r.failed) + " failed, max deviation " +
             fmt("%.2e", r.max_error) + ", time=" + fmt("%.2fs", secs);
  if (!r.failures.empty()) o.detail += ", first failure: " + r.failures.front();
  return o;
}

Outcome strategy_equivalence() {
  const auto t0 = Clock::now();
  const SuiteReport r = verify_equivalence(50, 2024);
  return suite_outcome(r, seconds_since(t0), 10.0);
}

Outcome lemma_suite() {
  const auto t0 = Clock::now();
  const SuiteReport r = verify_lemma1(100, 2024);
  return suite_outcome(r, seconds_since(t0), 30.0);
}

Outcome statistical_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  std::gamma_distribution<double> skewed(2.0, 1.0);
  const std::size_t n = 10000;
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const std::size_t L = dim(rng);
    Matrix r(L, n);
    for (double& v : r.data()) v = skewed(rng) - 2.0;
    const Vector u = random_unit(L, rng);
    double direct = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double y = dot(u, r.col(j));
      direct += y * y * y;
    }
    direct /= static_cast<double>(n);
    const double via_tensor = directional_skewness(build_coskewness(r), u);
    worst = std::max(worst, std::abs(via_tensor - direct) / std::max(std::abs(direct), 1e-300));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 10.0, "max relative deviation " + fmt("%.2e", worst) + ", time=" + fmt("%.2fs", secs)};
}

Outcome whitening_identity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t L = 6, n = 5000;
  double worst = 0.0;
  for (int c = 0; c < 5; ++c) {
    Matrix z(L, n);
    for (double& v : z.data()) v = g(rng);
    Matrix x = random_matrix(L, L, rng) * z;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < L; ++i) x(i, j) += static_cast<double>(i) * 3.0;
    const WhiteningModel model = fit_whitening(x);
    const Matrix r = apply_whitening(model, x);
    const Matrix cov = covariance(r, column_mean(r));
    worst = std::max(worst, max_abs_diff(cov.data(), Matrix::identity(model.retained).data()));
  }
  Matrix low(L, n);
  {
    Matrix z(3, n);
    for (double& v : z.data()) v = g(rng);
    low = random_matrix(L, 3, rng) * z;
  }
  const WhiteningModel trunc = fit_whitening(low);
  const Matrix rt = apply_whitening(trunc, low);
  const double trunc_dev = max_abs_diff(covariance(rt, column_mean(rt)).data(), Matrix::identity(trunc.retained).data());
  const double secs = seconds_since(t0);
  const bool ok = worst <= 1e-6 && trunc.retained == 3 && trunc_dev <= 1e-6 && secs < 5.0;
  return {ok, "max |Cov - I| " + fmt("%.2e", worst) + "; rank-3 data retained " + std::to_string(trunc.retained) +
                  " dims (|Cov - I| " + fmt("%.2e", trunc_dev) + "), time=" + fmt("%.2fs", secs)};
}

SearchConfig separation_config(Strategy st, std::uint64_t seed) {
  SearchConfig cfg;
  cfg.epsilon = 1e-10;
  cfg.max_iters = 2000;
  cfg.strategy = st;
  cfg.rng_seed = seed;
  return cfg;
}

Outcome comparative_bis() {
  const auto t0 = Clock::now();
  double isi_psa = 0.0, isi_npsa = 0.0, min_rho = 1.0;
  const int seeds = 10;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto sources = synthetic_sources(3, 64, seed);
    std::mt19937_64 rng(seed);
    const Matrix b = random_mixing(3, rng);
    for (Strategy st : {Strategy::PSA, Strategy::NPSAImproved}) {
      const SearchConfig cfg = separation_config(st, seed);
      const Separation sep = separate_mixture(sources, b, cfg);
      collect(sep.extraction.coskewness, sep.extraction.search, cfg,
              "bis seed " + std::to_string(seed) + " " + std::string(to_string(st)));
      if (st == Strategy::PSA) {
        isi_psa += sep.score.isi;
      } else {
        isi_npsa += sep.score.isi;
        for (double rho : sep.score.correlations) min_rho = std::min(min_rho, std::abs(rho));
      }
    }
  }
  isi_psa /= seeds;
  isi_npsa /= seeds;
  const double secs = seconds_since(t0);
  return {isi_npsa <= isi_psa && min_rho >= 0.95 && secs < 60.0,
          "mean ISI npsa " + fmt("%.5f", isi_npsa) + " vs psa " + fmt("%.5f", isi_psa) + ", min |rho| (npsa) " +
              fmt("%.4f", min_rho) + ", time=" + fmt("%.2fs", secs)};
}

Outcome skewness_dominance() {
  const auto t0 = Clock::now();
  double worst = 1e300;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticCube sc = synthetic_cube(64, 3, seed);
    const DataMatrix x = to_data_matrix(sc.cube);
    std::vector<double> comp[2];
    int slot = 0;
    for (Strategy st : {Strategy::PSA, Strategy::NPSAImproved}) {
      const SearchConfig cfg = separation_config(st, seed);
      const Extraction ex = extract_components(x, 3, cfg);
      collect(ex.coskewness, ex.search, cfg, "cube seed " + std::to_string(seed) + " " + std::string(to_string(st)));
      comp[slot++] = ex.component_skewness;
    }
    for (std::size_t i = 0; i < 3; ++i) worst = std::min(worst, comp[1][i] - comp[0][i]);
  }
  const double secs = seconds_since(t0);
  return {worst >= -1e-6 && secs < 30.0,
          "min over cubes/components of skew(npsa) - skew(psa) = " + fmt("%.3e", worst) + ", time=" + fmt("%.2fs", secs)};
}

// Best-of-batches wall time per call, each batch long enough to time reliably.
double time_per_call(const std::function<void()>& f) {
  int reps = 1;
  for (;;) {
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    if (seconds_since(t0) >= 0.02) break;
    reps *= 2;
  }
  double best = 1e300;
  for (int batch = 0; batch < 5; ++batch) {
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    best = std::min(best, seconds_since(t0) / reps);
  }
  return best;
}

Outcome deflation_timing() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(9);
  std::vector<double> ratios;
  std::string detail;
  double checksum = 0.0;
  for (std::size_t L : {4, 6, 8, 10, 12}) {
    const Tensor3 s = random_supersymmetric(L, rng);
    const Vector u = random_unit(L, rng);
    const double ref = time_per_call([&] { checksum += deflate_npsa_reference(s, u).data()[0]; });
    const double imp = time_per_call([&] { checksum += deflate_npsa_improved(s, u).data()[0]; });
    ratios.push_back(imp / ref);
    detail += "L=" + std::to_string(L) + " " + fmt("%.1fx", ref / imp) + " ";
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) monotone = monotone && ratios[i] < ratios[i - 1];
  const double secs = seconds_since(t0);
  const bool ok = monotone && 1.0 / ratios.back() >= 20.0 && secs < 60.0 && std::isfinite(checksum);
  return {ok, "speedup " + detail + (monotone ? "(monotone)" : "(NOT monotone)") + ", time=" + fmt("%.2fs", secs)};
}

Outcome residual_bound() {
  std::size_t converged = 0;
  double worst = 0.0, min_lambda = 1e300;
  std::string worst_where;
  for (const FoundPair& f : g_found) {
    if (!f.pair.converged) continue;
    ++converged;
    const double r = eigen_residual(f.tensor, f.pair.u, f.pair.lambda);
    if (r > worst) {
      worst = r;
      worst_where = f.where;
    }
    min_lambda = std::min(min_lambda, f.pair.lambda);
  }
  const bool ok = converged > 0 && worst <= 1e-3 && min_lambda >= 0.0;
  return {ok, std::to_string(converged) + " of " + std::to_string(g_found.size()) +
                  " pairs converged; max residual " + fmt("%.2e", worst) + " (" + worst_where + "), min lambda " +
                  fmt("%.4f", min_lambda)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"golden oracle eigenpairs", golden_oracle},
      {"golden PSA vs NPSA second vector", golden_deflation},
      {"reference vs improved deflation", strategy_equivalence},
      {"projector containment and ranks", lemma_suite},
      {"coskewness statistical identity", statistical_identity},
      {"whitening identity and truncation", whitening_identity},
      {"comparative blind separation", comparative_bis},
      {"per-component skewness dominance", skewness_dominance},
      {"deflation cost scaling", deflation_timing},
      {"eigenpair residual and sign", residual_bound},
  };
  int failed = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
