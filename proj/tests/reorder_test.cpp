#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fiedler/reorder.hpp"
#include "test_support.hpp"

using namespace fiedler;

namespace {

SparseMatrix example3() {
  return SparseMatrix::from_triplets(3, {{0, 0, 2}, {0, 2, 1}, {1, 1, 2}, {2, 0, 1}, {2, 2, 2}}, true);
}

SparseMatrix random_sparse(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-4, 4);
  std::uniform_int_distribution<index_t> idx(0, static_cast<index_t>(n) - 1);
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < 3 * n; ++k) {
    const index_t i = idx(rng), j = idx(rng);
    const double v = d(rng);
    t.push_back({i, j, v});
    t.push_back({j, i, v});
  }
  t.push_back({0, 0, 1.0});
  return SparseMatrix::from_triplets(n, t, true);
}

}  // namespace

TEST(FiedlerPermutation, Examples) {
  EXPECT_EQ(fiedler_permutation(std::vector<double>{0.5, -0.2, 0.9}).forward(), (std::vector<std::size_t>{1, 0, 2}));
  EXPECT_EQ(fiedler_permutation(std::vector<double>{-1, 0, 3}).forward(), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(fiedler_permutation(std::vector<double>{0, 0, -1}).forward(), (std::vector<std::size_t>{2, 0, 1}));
  EXPECT_THROW(fiedler_permutation(std::vector<double>{0, NAN}), std::invalid_argument);
}

TEST(FiedlerPermutation, ScalingAndNegation) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(40), scaled(40), neg(40);
    for (std::size_t i = 0; i < 40; ++i) {
      x[i] = d(rng);
      scaled[i] = 3.5 * x[i];
      neg[i] = -x[i];
    }
    const auto P = fiedler_permutation(x);
    EXPECT_EQ(fiedler_permutation(scaled).forward(), P.forward());
    auto rev = P.forward();
    std::reverse(rev.begin(), rev.end());
    EXPECT_EQ(fiedler_permutation(neg).forward(), rev);  // distinct values, so no ties
  }
}

TEST(Permutation, RejectsNonBijection) {
  EXPECT_THROW(Permutation({0, 0, 1}), std::invalid_argument);
  EXPECT_THROW(Permutation({0, 3, 1}), std::invalid_argument);
  const Permutation P({2, 0, 1});
  EXPECT_EQ(P.inverse(), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(P.inverted().forward(), P.inverse());
}

TEST(ApplyPermutation, Examples) {
  const auto A = random_sparse(12, 1);
  const auto I = apply_permutation(A, Permutation::identity(12));
  EXPECT_EQ(I.values(), A.values());
  EXPECT_EQ(I.col_indices(), A.col_indices());

  const auto D = SparseMatrix::from_triplets(3, {{0, 0, 1}, {1, 1, 2}, {2, 2, 3}});
  const auto R = apply_permutation(D, Permutation({2, 1, 0}));
  EXPECT_EQ(R.at(0, 0), 3.0);
  EXPECT_EQ(R.at(1, 1), 2.0);
  EXPECT_EQ(R.at(2, 2), 1.0);

  const Permutation P({3, 0, 11, 5, 2, 1, 4, 10, 9, 8, 7, 6});
  const auto back = apply_permutation(apply_permutation(A, P), P.inverted());
  EXPECT_EQ(back.values(), A.values());
  EXPECT_EQ(back.col_indices(), A.col_indices());
  EXPECT_THROW(apply_permutation(A, Permutation::identity(3)), DimensionError);
}

TEST(ApplyPermutation, PreservesValuesAndSpectrum) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::size_t n = 5 + s;
    const auto A = random_sparse(n, 20 + s);
    const auto B = testing_support::shuffle_symmetric(A, s);
    EXPECT_TRUE(B.symmetric());
    EXPECT_EQ(B.nnz(), A.nnz());
    auto va = A.values(), vb = B.values();
    std::sort(va.begin(), va.end());
    std::sort(vb.begin(), vb.end());
    EXPECT_EQ(va, vb);
    const auto ea = testing_support::dense_spectrum(A).values;
    const auto eb = testing_support::dense_spectrum(B).values;
    for (Eigen::Index i = 0; i < ea.size(); ++i) EXPECT_NEAR(ea(i), eb(i), 1e-12 * (1 + std::abs(ea(i))));
  }
}

TEST(Bandweight, Examples) {
  const auto D = SparseMatrix::from_triplets(4, {{0, 0, 1}, {1, 1, -2}, {3, 3, 5}});
  EXPECT_EQ(bandweight(D, 1), 1.0);
  EXPECT_EQ(bandweight(testing_support::tridiagonal(6), 2), 1.0);
  EXPECT_EQ(bandweight(example3(), 1), 0.75);
  EXPECT_THROW(bandweight(SparseMatrix::from_triplets(3, {}), 1), std::invalid_argument);
  EXPECT_THROW(bandweight(D, 0), std::invalid_argument);
}

TEST(BandweightProfile, Examples) {
  const auto D = SparseMatrix::from_triplets(4, {{0, 0, 1}, {1, 1, 1}, {2, 2, 1}, {3, 3, 1}});
  const std::vector<std::size_t> ks{1, 2, 4};
  EXPECT_EQ(bandweight_profile(D, ks).weights, (std::vector<double>{1, 1, 1}));

  const auto anti = SparseMatrix::from_triplets(4, {{0, 3, 1}, {1, 2, 1}, {2, 1, 1}, {3, 0, 1}});
  const std::vector<std::size_t> k14{1, 4};
  const auto p = bandweight_profile(anti, k14);
  EXPECT_EQ(p.weights, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(p.total_weight, 4.0);

  const std::vector<std::size_t> unsorted{2, 1};
  EXPECT_THROW(bandweight_profile(D, unsorted), std::invalid_argument);
}

TEST(BandweightProfile, MonotoneBoundedAndScaleInvariant) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const std::size_t n = 10 + 4 * s;
    const auto A = random_sparse(n, 40 + s);
    auto t = A.triplets();
    for (auto& e : t) e.value *= 7.25;
    const auto B = SparseMatrix::from_triplets(n, t, true);
    const auto ks = default_half_widths(n);
    const auto pa = bandweight_profile(A, ks);
    const auto pb = bandweight_profile(B, ks);
    for (std::size_t i = 0; i < ks.size(); ++i) {
      EXPECT_GE(pa.weights[i], 0.0);
      EXPECT_LE(pa.weights[i], 1.0);
      if (i) { EXPECT_GE(pa.weights[i], pa.weights[i - 1]); }
      EXPECT_NEAR(pb.weights[i], pa.weights[i], 4e-15);
    }
    EXPECT_EQ(bandweight(A, n), 1.0);
  }
}

TEST(DefaultHalfWidths, SpanOneToN) {
  const auto ks = default_half_widths(200);
  EXPECT_EQ(ks.front(), 1u);
  EXPECT_EQ(ks.back(), 200u);
  EXPECT_LE(ks.size(), 32u);
  EXPECT_TRUE(std::is_sorted(ks.begin(), ks.end()));
  EXPECT_EQ(default_half_widths(1), (std::vector<std::size_t>{1}));
}

TEST(Output, CsvAndPermutationFormats) {
  std::ostringstream csv;
  const std::vector<std::size_t> k1{1};
  write_bandweight_csv(csv, bandweight_profile(example3(), k1));
  EXPECT_EQ(csv.str(), "k,bandweight\n1,0.75\n");

  std::ostringstream perm;
  write_permutation(perm, Permutation({1, 0, 2}), "p3", 1.0);
  std::istringstream in(perm.str());
  std::string line;
  std::vector<std::string> body;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') body.push_back(line);
  EXPECT_EQ(body, (std::vector<std::string>{"1", "0", "2"}));
  EXPECT_NE(perm.str().find("p3"), std::string::npos);
}

TEST(SpectralReorder, TridiagonalStaysBanded) {
  const auto A = testing_support::tridiagonal(60);
  const auto P = testing_support::spectral_order(A);
  const auto ks = default_half_widths(60);
  const auto before = bandweight_profile(A, ks);
  const auto after = bandweight_profile(apply_permutation(A, P), ks);
  for (std::size_t i = 0; i < ks.size(); ++i) EXPECT_GE(after.weights[i], before.weights[i]);
}

TEST(SpectralReorder, RecoversShuffledTridiagonal) {
  const std::size_t n = 200;
  const auto base = testing_support::tridiagonal(n);
  const auto ks = default_half_widths(n);
  int good_w2 = 0, dominant = 0;
  const int trials = 20;
  for (int s = 0; s < trials; ++s) {
    const auto shuffled = testing_support::shuffle_symmetric(base, 1000 + s);
    const auto reordered = apply_permutation(shuffled, testing_support::spectral_order(shuffled));
    if (bandweight(reordered, 2) >= 0.95) ++good_w2;
    const auto a = bandweight_profile(shuffled, ks), b = bandweight_profile(reordered, ks);
    bool dom = true;
    for (std::size_t i = 0; i < ks.size(); ++i) dom = dom && b.weights[i] >= a.weights[i];
    dominant += dom;
  }
  EXPECT_GE(good_w2, trials * 9 / 10);
  EXPECT_GE(dominant, trials * 8 / 10);
}
