// Orthogonal vs oblique deflation on a 2x2x2 supersymmetric tensor whose two
// skewness eigenvectors are not orthogonal.

#include <cstdio>

#include "npsa/npsa.hpp"

int main() {
  using namespace npsa;
  const std::vector<Matrix> slices{Matrix::from_rows({{2.0, -1.0}, {-1.0, 0.8}}),
                                   Matrix::from_rows({{-1.0, 0.8}, {0.8, 0.3}})};
  const Tensor3 s = Tensor3::from_slices(slices);

  const auto truth = brute_force_eigenpairs(s, 3600);
  for (const auto& p : truth) std::printf("eigenpair  u = [% .4f, % .4f]  lambda = %.4f\n", p.u[0], p.u[1], p.lambda);

  SearchConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iters = 10000;
  cfg.restarts = 16;
  for (Strategy st : {Strategy::PSA, Strategy::NPSAImproved}) {
    cfg.strategy = st;
    const SearchResult r = run(s, 2, cfg);
    const Vector& u2 = r.pairs[1].u;
    std::printf("%-4s second vector [% .4f, % .4f], %.4f deg from the true one\n",
                std::string(to_string(st)).c_str(), u2[0], u2[1], unsigned_angle_deg(u2, truth[1].u));
  }
}
