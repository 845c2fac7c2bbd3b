// Fiedler vector of a weighted path, then the spectral order of its vertices.
//
//   ./path_fiedler [n]

#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <random>

#include "fiedler/fiedler.hpp"

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 12;

  // Path 0-1-...-(n-1) with random weights, vertex labels shuffled.
  std::mt19937_64 rng(7);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = i;
  std::shuffle(label.begin(), label.end(), rng);
  std::uniform_real_distribution<double> weight(0.5, 2.0);
  std::vector<fiedler::Triplet> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double w = weight(rng);
    edges.push_back({fiedler::index_t(label[i]), fiedler::index_t(label[i + 1]), w});
    edges.push_back({fiedler::index_t(label[i + 1]), fiedler::index_t(label[i]), w});
  }
  const auto A = fiedler::SparseMatrix::from_triplets(n, edges, true);

  const auto pair = fiedler::build_laplacian(fiedler::preprocess(A));
  const auto result = fiedler::tracemin_fiedler(pair, fiedler::SolverConfig{});
  std::printf("lambda2 = %.12g  residual = %.3g  outer = %zu\n", result.lambda2, result.relative_residual,
              result.outer_iterations);

  const auto perm = fiedler::fiedler_permutation(result.fiedler_vector);
  std::printf("spectral order:");
  for (std::size_t v : perm.forward()) std::printf(" %zu", v);
  std::printf("\npath order:    ");
  for (std::size_t v : label) std::printf(" %zu", v);
  std::printf("\nw_2 before = %.3f, after = %.3f\n", fiedler::bandweight(A, 2),
              fiedler::bandweight(fiedler::apply_permutation(A, perm), 2));
  return 0;
}
