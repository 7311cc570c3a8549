// npsa: command-line driver for principal skewness analysis.
//
//   npsa eigen   <tensor.csv>              eigenpairs of a small tensor
//   npsa extract <cube.hdr> <cube.raw>     feature extraction on a cube
//   npsa bis     <source.pgm>...           synthetic blind image separation
//   npsa verify  --suite ...               randomized property suites
//   npsa synth   sources|cube              seeded test data
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "npsa/npsa.hpp"

namespace fs = std::filesystem;
using namespace npsa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ZeroContraction:
    case ErrorCode::NoConvergence:
    case ErrorCode::RankDeficient:
    case ErrorCode::DegenerateData:
      return kExitNumerical;
    default:
      return kExitValidation;
  }
}

struct SearchFlags {
  double epsilon = 1e-4;
  int max_iters = 50;
  int restarts = 1;
  std::uint64_t seed = 0;
  bool strict = false;

  void attach(CLI::App* app) {
    app->add_option("--epsilon", epsilon, "Stop when 1-|<u_k+1,u_k>| drops below this")->capture_default_str();
    app->add_option("--max-iters", max_iters, "Iteration cap per component")->capture_default_str();
    app->add_option("--restarts", restarts, "Random starts per component (largest lambda kept)")
        ->capture_default_str();
    app->add_option("--seed", seed, "Random seed")->capture_default_str();
    app->add_flag("--strict", strict, "Exit 2 if any component fails to converge");
  }

  SearchConfig config(Strategy s) const {
    SearchConfig cfg;
    cfg.epsilon = epsilon;
    cfg.max_iters = max_iters;
    cfg.restarts = restarts;
    cfg.rng_seed = seed;
    cfg.strategy = s;
    return cfg;
  }

  nlohmann::json to_json() const {
    return {{"epsilon", epsilon}, {"max_iters", max_iters}, {"restarts", restarts}, {"seed", seed}};
  }
};

std::string format_vector(std::span<const double> v) {
  std::string s = "[";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.4f", i ? ", " : "", v[i]);
    s += buf;
  }
  return s + "]";
}

void print_pair(std::size_t index, const EigenPair& p) {
  std::printf("  pair %zu: u = %s  lambda = %.6f  iterations = %d  converged = %s\n", index + 1,
              format_vector(p.u).c_str(), p.lambda, p.iterations, p.converged ? "yes" : "no");
}

std::vector<Strategy> strategies_for(const std::string& name) {
  if (name == "both") return {Strategy::PSA, Strategy::NPSAImproved};
  if (name == "all") return {Strategy::PSA, Strategy::NPSAReference, Strategy::NPSAImproved};
  return {parse_strategy(name)};
}

// ---- eigen ------------------------------------------------------------------

struct EigenArgs {
  std::string tensor_csv;
  std::string strategy = "both";
  std::size_t p = 0;
  bool oracle = false;
  bool symmetrize = false;
  std::size_t grid = 3600;
  std::string report;
  SearchFlags search{1e-12, 10000, 16, 0, false};
};

int cmd_eigen(const EigenArgs& a) {
  Tensor3 s = read_tensor_csv(a.tensor_csv);
  if (!s.is_supersymmetric()) {
    std::fprintf(stderr, "warning: tensor is not supersymmetric (max asymmetry %.3g)%s\n", s.asymmetry(),
                 a.symmetrize ? "; averaging over index permutations" : "; pass --symmetrize to average it");
    if (a.symmetrize) s = s.symmetrized();
  }
  const std::size_t p = a.p == 0 ? s.dim() : a.p;
  std::printf("tensor: %zu x %zu x %zu, extracting p = %zu\n", s.dim(), s.dim(), s.dim(), p);

  std::vector<EigenPair> oracle_pairs;
  if (a.oracle) {
    oracle_pairs = brute_force_eigenpairs(s, a.grid);
    std::printf("oracle (brute force, grid %zu): %zu local maxima\n", a.grid, oracle_pairs.size());
    for (std::size_t i = 0; i < oracle_pairs.size(); ++i) print_pair(i, oracle_pairs[i]);
    for (std::size_t i = 0; i + 1 < oracle_pairs.size(); ++i)
      for (std::size_t j = i + 1; j < oracle_pairs.size(); ++j)
        std::printf("  <u%zu, u%zu> = %.4f\n", i + 1, j + 1, dot(oracle_pairs[i].u, oracle_pairs[j].u));
  }

  nlohmann::json runs = nlohmann::json::array();
  bool all_converged = true;
  for (Strategy st : strategies_for(a.strategy)) {
    const SearchResult res = run(s, p, a.search.config(st));
    all_converged = all_converged && res.all_converged();
    std::printf("strategy %s\n", std::string(to_string(st)).c_str());
    for (std::size_t i = 0; i < res.pairs.size(); ++i) {
      print_pair(i, res.pairs[i]);
      if (!oracle_pairs.empty()) {
        double best = 180.0;
        std::size_t which = 0;
        for (std::size_t k = 0; k < oracle_pairs.size(); ++k) {
          const double ang = unsigned_angle_deg(res.pairs[i].u, oracle_pairs[k].u);
          if (ang < best) {
            best = ang;
            which = k;
          }
        }
        std::printf("    angle to nearest oracle pair (u%zu): %.4f deg\n", which + 1, best);
      }
    }
    SkewReport rep;
    rep.pairs = res.pairs;
    rep.U = res.U;
    runs.push_back(to_json(rep));
    runs.back()["strategy"] = std::string(to_string(st));
  }

  if (!a.report.empty()) {
    nlohmann::json doc{{"command", "eigen"},
                       {"tensor", a.tensor_csv},
                       {"p", p},
                       {"search", a.search.to_json()},
                       {"runs", runs}};
    if (!oracle_pairs.empty()) {
      SkewReport orep;
      orep.pairs = oracle_pairs;
      doc["oracle"] = to_json(orep)["eigenpairs"];
    }
    detail::write_all(a.report, doc.dump(2) + "\n");
  }
  if (a.search.strict && !all_converged) {
    std::fprintf(stderr, "error: at least one component did not converge\n");
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- extract ----------------------------------------------------------------

struct ExtractArgs {
  std::string header;
  std::string data;
  std::size_t p = 0;
  std::string strategy = "npsa";
  std::string out = "npsa_out";
  SearchFlags search;
};

int cmd_extract(const ExtractArgs& a) {
  const Cube cube = read_cube(a.header, a.data);
  if (a.p == 0 || a.p > cube.bands)
    throw Error(ErrorCode::Validation, "--p must be between 1 and the band count (" +
                                           std::to_string(cube.bands) + ")");
  const Strategy st = parse_strategy(a.strategy);
  const Extraction ex = extract_components(to_data_matrix(cube), a.p, a.search.config(st));

  fs::create_directories(a.out);
  const auto rows = rows_of(ex.components);
  for (std::size_t i = 0; i < a.p; ++i)
    write_pgm(fs::path(a.out) / ("component_" + std::to_string(i + 1) + ".pgm"),
              min_max_stretch(cube.samples, cube.lines, rows[i]), 65535);
  write_cube(fs::path(a.out) / "components.hdr", fs::path(a.out) / "components.raw",
             from_data_matrix(ex.components, cube.samples, cube.lines));

  SkewReport rep;
  rep.config = {{"command", "extract"},
                {"cube", a.header},
                {"strategy", std::string(to_string(st))},
                {"p", a.p},
                {"search", a.search.to_json()}};
  rep.pairs = ex.search.pairs;
  rep.U = ex.search.U;
  rep.component_skewness = ex.component_skewness;
  rep.extra = {{"whitening_eigenvalues", ex.whitening.eigenvalues},
               {"retained_dimensions", ex.whitening.retained}};
  write_report(fs::path(a.out) / "report.json", rep);

  std::printf("cube: %zu samples x %zu lines x %zu bands; whitened dimensions %zu\n", cube.samples,
              cube.lines, cube.bands, ex.whitening.retained);
  std::printf("strategy %s\n", std::string(to_string(st)).c_str());
  for (std::size_t i = 0; i < ex.search.pairs.size(); ++i) {
    print_pair(i, ex.search.pairs[i]);
    std::printf("    component skewness = %.6f\n", ex.component_skewness[i]);
  }
  if (a.search.strict && !ex.search.all_converged()) {
    std::fprintf(stderr, "error: at least one component did not converge\n");
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- bis --------------------------------------------------------------------

struct BisArgs {
  std::vector<std::string> sources;
  std::string algo = "npsa";
  std::string out = "bis_out";
  bool identity_mixing = false;
  SearchFlags search;
};

int cmd_bis(const BisArgs& a) {
  if (a.sources.size() < 2) throw Error(ErrorCode::Validation, "bis needs at least two source images");
  std::vector<ImagePlane> planes;
  for (const auto& path : a.sources) planes.push_back(read_pgm(path));
  for (const auto& pl : planes)
    if (pl.width != planes.front().width || pl.height != planes.front().height)
      throw Error(ErrorCode::SizeMismatch, "source images differ in size");

  std::vector<Vector> srcs;
  for (const auto& pl : planes) srcs.push_back(pl.pixels);
  std::mt19937_64 rng(a.search.seed);
  const Matrix mixing = a.identity_mixing ? Matrix::identity(srcs.size()) : random_mixing(srcs.size(), rng);
  const Strategy st = parse_strategy(a.algo);
  const Separation sep = separate_mixture(srcs, mixing, a.search.config(st));

  const std::size_t w = planes.front().width, h = planes.front().height;
  fs::create_directories(a.out);
  const auto estimates = rows_of(sep.estimates);
  const auto mixed = rows_of(sep.mixed);
  for (std::size_t k = 0; k < srcs.size(); ++k) {
    Vector est = estimates[sep.score.matching.estimate_for_source[k]];
    if (sep.score.matching.sign[k] < 0)
      for (double& v : est) v = -v;
    write_pgm(fs::path(a.out) / ("separated_" + std::to_string(k + 1) + ".pgm"), min_max_stretch(w, h, est));
    write_pgm(fs::path(a.out) / ("mixed_" + std::to_string(k + 1) + ".pgm"), min_max_stretch(w, h, mixed[k]));
  }

  SkewReport rep;
  rep.config = {{"command", "bis"},
                {"sources", a.sources},
                {"algo", std::string(to_string(st))},
                {"identity_mixing", a.identity_mixing},
                {"search", a.search.to_json()}};
  rep.pairs = sep.extraction.search.pairs;
  rep.U = sep.extraction.search.U;
  rep.component_skewness = sep.extraction.component_skewness;
  rep.separation = sep.score;
  rep.extra = {{"mixing", matrix_to_json(mixing)}, {"global", matrix_to_json(sep.global)}};
  write_report(fs::path(a.out) / "report.json", rep);

  std::printf("algo %s, %zu sources of %zu x %zu\n", std::string(to_string(st)).c_str(), srcs.size(), w, h);
  std::printf("ISI  = %.6g\nTMSE = %.6g\n", sep.score.isi, sep.score.tmse);
  for (std::size_t k = 0; k < srcs.size(); ++k)
    std::printf("source %zu <- component %zu (sign %+d): rho = %.4f, mse = %.3g\n", k + 1,
                sep.score.matching.estimate_for_source[k] + 1, sep.score.matching.sign[k],
                sep.score.correlations[k], sep.score.per_source_mse[k]);
  if (a.search.strict && !sep.extraction.search.all_converged()) {
    std::fprintf(stderr, "error: at least one component did not converge\n");
    return kExitNumerical;
  }
  return kExitOk;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 1;
  std::size_t cases = 0;
};

int cmd_verify(const VerifyArgs& a) {
  std::vector<SuiteReport> reports;
  auto want = [&](const char* s) { return a.suite == "all" || a.suite == s; };
  if (want("kron")) reports.push_back(verify_kron(a.cases ? a.cases : 20, a.seed));
  if (want("equivalence")) reports.push_back(verify_equivalence(a.cases ? a.cases : 50, a.seed));
  if (want("lemma1")) reports.push_back(verify_lemma1(a.cases ? a.cases : 100, a.seed));
  if (reports.empty()) throw Error(ErrorCode::Validation, "unknown suite '" + a.suite + "'");

  bool ok = true;
  for (const auto& r : reports) {
    std::printf("suite %-12s %zu passed, %zu failed (max deviation %.3g)\n", r.name.c_str(), r.passed,
                r.failed, r.max_error);
    for (const auto& f : r.failures) std::printf("  FAIL %s\n", f.c_str());
    ok = ok && r.ok();
  }
  return ok ? kExitOk : kExitNumerical;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string kind;
  std::size_t count = 3;
  std::size_t side = 64;
  std::uint64_t seed = 1;
  std::string out = "synth";
};

int cmd_synth(const SynthArgs& a) {
  fs::create_directories(a.out);
  if (a.kind == "sources") {
    const auto srcs = synthetic_sources(a.count, a.side, a.seed);
    for (std::size_t k = 0; k < srcs.size(); ++k) {
      const fs::path path = fs::path(a.out) / ("source_" + std::to_string(k + 1) + ".pgm");
      write_pgm(path, min_max_stretch(a.side, a.side, srcs[k]), 65535);
      std::printf("%s (skewness %.4f)\n", path.c_str(), sample_skewness(srcs[k]));
    }
  } else {
    const SyntheticCube sc = synthetic_cube(a.side, a.count, a.seed);
    write_cube(fs::path(a.out) / "cube.hdr", fs::path(a.out) / "cube.raw", sc.cube);
    std::printf("%s/cube.hdr, %s/cube.raw: %zu x %zu x %zu\n", a.out.c_str(), a.out.c_str(), a.side, a.side,
                a.count);
    for (std::size_t k = 0; k < sc.sources.size(); ++k)
      std::printf("  source %zu skewness %.4f\n", k + 1, sample_skewness(sc.sources[k]));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal skewness analysis with orthogonal (PSA) and oblique (NPSA) deflation"};
  app.require_subcommand(1);

  const std::vector<std::string> strategy_names{"psa", "npsa", "npsa-reference", "both", "all"};

  EigenArgs eigen;
  auto* e = app.add_subcommand("eigen", "Eigenpairs of a small supersymmetric tensor");
  e->add_option("tensor", eigen.tensor_csv, "CSV of frontal slices stacked vertically ((L*L) x L)")
      ->required()
      ->check(CLI::ExistingFile);
  e->add_option("--strategy", eigen.strategy, "psa | npsa | npsa-reference | both | all")
      ->check(CLI::IsMember(strategy_names))
      ->capture_default_str();
  e->add_option("--p", eigen.p, "Number of eigenpairs (default: L)");
  e->add_flag("--oracle", eigen.oracle, "Also enumerate eigenpairs by brute force (L = 2 or 3)");
  e->add_option("--grid", eigen.grid, "Oracle angular grid resolution")->capture_default_str();
  e->add_flag("--symmetrize", eigen.symmetrize, "Average a non-supersymmetric tensor over permutations");
  e->add_option("--report", eigen.report, "Write a JSON report here");
  eigen.search.attach(e);

  ExtractArgs extract;
  auto* x = app.add_subcommand("extract", "Principal skewness components of a multiband cube");
  x->add_option("header", extract.header, "ENVI-style header")->required()->check(CLI::ExistingFile);
  x->add_option("data", extract.data, "Raw data file")->required()->check(CLI::ExistingFile);
  x->add_option("--p", extract.p, "Number of components")->required();
  x->add_option("--strategy", extract.strategy, "psa | npsa | npsa-reference")
      ->check(CLI::IsMember({"psa", "npsa", "npsa-reference"}))
      ->capture_default_str();
  x->add_option("--out", extract.out, "Output directory")->capture_default_str();
  extract.search.attach(x);

  BisArgs bis;
  auto* b = app.add_subcommand("bis", "Mix source images with a seeded random matrix and separate them");
  b->add_option("sources", bis.sources, "Two or more equally sized P5 PGM images")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--algo", bis.algo, "psa | npsa")->check(CLI::IsMember({"psa", "npsa"}))->capture_default_str();
  b->add_option("--out", bis.out, "Output directory")->capture_default_str();
  b->add_flag("--identity-mixing", bis.identity_mixing, "Use B = I instead of a random mixing matrix");
  bis.search.attach(b);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run randomized property suites");
  v->add_option("--suite", verify.suite, "lemma1 | kron | equivalence | all")
      ->check(CLI::IsMember({"lemma1", "kron", "equivalence", "all"}))
      ->capture_default_str();
  v->add_option("--seed", verify.seed, "Random seed")->capture_default_str();
  v->add_option("--cases", verify.cases, "Cases per suite (default: kron 20, equivalence 50, lemma1 100)");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write seeded synthetic sources (PGM) or a mixed cube (ENVI)");
  s->add_option("kind", synth.kind, "sources | cube")->required()->check(CLI::IsMember({"sources", "cube"}));
  s->add_option("--count", synth.count, "Number of sources / bands")->capture_default_str();
  s->add_option("--side", synth.side, "Image side length in pixels")->capture_default_str();
  s->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  s->add_option("--out", synth.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (e->parsed()) return cmd_eigen(eigen);
    if (x->parsed()) return cmd_extract(extract);
    if (b->parsed()) return cmd_bis(bis);
    if (v->parsed()) return cmd_verify(verify);
    if (s->parsed()) return cmd_synth(synth);
  } catch (const Error& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitValidation;
  }
  return kExitOk;
}
