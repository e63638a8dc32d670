#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "corrdetect/errors.hpp"
#include "corrdetect/io.hpp"
#include "corrdetect/model.hpp"
#include "corrdetect/parallel.hpp"
#include "corrdetect/rng.hpp"

using namespace corrdetect;

namespace {

// Chi-square statistic against a uniform law on `cells` outcomes.
template <class Map>
double chi_square(const Map& counts, std::size_t cells, std::size_t total) {
  const double e = static_cast<double>(total) / static_cast<double>(cells);
  double s = 0.0;
  for (const auto& [key, c] : counts) s += (c - e) * (c - e) / e;
  s += static_cast<double>(cells - counts.size()) * e;  // unseen outcomes
  return s;
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_NO_THROW((ModelParams{3, 2, 3, 0.5}.validate()));
  EXPECT_THROW((ModelParams{0, 1, 1, 0.0}.validate()), DomainError);
  EXPECT_THROW((ModelParams{3, 0, 1, 0.0}.validate()), DomainError);
  EXPECT_THROW((ModelParams{3, 1, 4, 0.0}.validate()), DomainError);
  EXPECT_THROW((ModelParams{3, 1, 0, 0.0}.validate()), DomainError);
  EXPECT_THROW((ModelParams{3, 1, 1, 1.5}.validate()), DomainError);
  EXPECT_NO_THROW((ModelParams{3, 1, 1, 1.0}.validate()));
  EXPECT_THROW((ModelParams{3, 1, 1, 1.0}.require_density()), DomainError);
  const auto p = ModelParams::from_rho2(4, 1, 2, 0.25, -1);
  EXPECT_DOUBLE_EQ(p.rho, -0.5);
  EXPECT_THROW(ModelParams::from_rho2(4, 1, 2, 1.5), DomainError);
  // 1 - rho^2 keeps its relative accuracy next to |rho| = 1.
  const ModelParams q{1, 1, 1, 1.0 - 1e-12};
  EXPECT_NEAR(q.one_minus_rho2() / (2e-12 - 1e-24), 1.0, 1e-4);
}

TEST(Rng, DeriveSeedIsPureAndSpreads) {
  EXPECT_EQ(derive_seed(7, SeedTag::trial, 3), derive_seed(7, SeedTag::trial, 3));
  EXPECT_NE(derive_seed(7, SeedTag::trial, 3), derive_seed(7, SeedTag::trial, 4));
  EXPECT_NE(derive_seed(7, SeedTag::trial, 3), derive_seed(7, SeedTag::hidden, 3));
  EXPECT_NE(derive_seed(7, SeedTag::trial, 3), derive_seed(8, SeedTag::trial, 3));
}

TEST(Rng, UniformAndBelow) {
  Rng r(99);
  MomentAccumulator u;
  std::map<std::uint64_t, std::size_t> counts;
  for (int i = 0; i < 600000; ++i) {
    const double v = r.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    u.add(v);
    ++counts[r.below(6)];
  }
  EXPECT_NEAR(u.mean(), 0.5, 4.0 * u.stderr_of_mean());
  EXPECT_LT(chi_square(counts, 6, 600000), 30.0);
}

TEST(Sampling, NullMoments) {
  const ModelParams p{1, 1, 1, 0.0};
  MomentAccumulator mx, my, cross;
  DatabasePair pair;
  for (std::uint64_t t = 0; t < 1000000; ++t) {
    sample_null_into(p, derive_seed(5, SeedTag::trial, t), pair);
    mx.add(pair.X.data[0]);
    my.add(pair.Y.data[0]);
    cross.add(pair.X.data[0] * pair.Y.data[0]);
  }
  EXPECT_NEAR(mx.mean(), 0.0, 4.0 * mx.stderr_of_mean());
  EXPECT_NEAR(my.mean(), 0.0, 4.0 * my.stderr_of_mean());
  EXPECT_NEAR(mx.variance(), 1.0, 0.01);
  EXPECT_NEAR(cross.mean(), 0.0, 4.0 * cross.stderr_of_mean());
}

TEST(Sampling, Deterministic) {
  const ModelParams p{5, 3, 2, 0.6};
  const auto a = sample_null(p, 42), b = sample_null(p, 42), c = sample_null(p, 43);
  EXPECT_EQ(a.X.data, b.X.data);
  EXPECT_EQ(a.Y.data, b.Y.data);
  EXPECT_NE(a.X.data, c.X.data);
  const auto [pa, ha] = sample_alternative(p, 42);
  const auto [pb, hb] = sample_alternative(p, 42);
  EXPECT_EQ(pa.X.data, pb.X.data);
  EXPECT_EQ(pa.Y.data, pb.Y.data);
  EXPECT_EQ(ha.sigma, hb.sigma);
  EXPECT_EQ(ha.K, hb.K);
}

TEST(Sampling, HiddenPermutationUniform) {
  const ModelParams p{3, 1, 3, 0.0};
  std::map<std::vector<std::size_t>, std::size_t> counts;
  for (std::uint64_t t = 0; t < 600000; ++t) {
    const auto h = sample_hidden(p, derive_seed(11, SeedTag::hidden, t));
    EXPECT_EQ(h.K, (std::vector<std::size_t>{0, 1, 2}));
    ++counts[h.sigma];
  }
  EXPECT_EQ(counts.size(), 6u);
  EXPECT_LT(chi_square(counts, 6, 600000), 30.0);
}

TEST(Sampling, HiddenSubsetUniform) {
  const ModelParams p{4, 1, 2, 0.0};
  std::map<std::vector<std::size_t>, std::size_t> counts;
  for (std::uint64_t t = 0; t < 600000; ++t) {
    const auto h = sample_hidden(p, derive_seed(12, SeedTag::hidden, t));
    ASSERT_EQ(h.K.size(), 2u);
    ASSERT_LT(h.K[0], h.K[1]);
    ++counts[h.K];
  }
  EXPECT_EQ(counts.size(), 6u);
  EXPECT_LT(chi_square(counts, 6, 600000), 30.0);
}

TEST(Sampling, AlternativeUsesTheHiddenStream) {
  const ModelParams p{6, 2, 3, 0.4};
  const auto [pair, h] = sample_alternative(p, 77);
  const auto again = sample_hidden(p, derive_seed(77, SeedTag::hidden, 0));
  EXPECT_EQ(h.sigma, again.sigma);
  EXPECT_EQ(h.K, again.K);
}

TEST(Sampling, PerfectCoupling) {
  const ModelParams p{6, 3, 6, 1.0};
  const auto [pair, h] = sample_alternative(p, 3);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.d; ++j) EXPECT_DOUBLE_EQ(pair.Y(h.sigma[i], j), pair.X(i, j));
  }
}

TEST(Sampling, RhoZeroAlternativeLooksNull) {
  const ModelParams p{2, 1, 2, 0.0};
  MomentAccumulator alt_cross, alt_sq;
  DatabasePair pair;
  HiddenStructure h;
  for (std::uint64_t t = 0; t < 200000; ++t) {
    sample_alternative_into(p, derive_seed(21, SeedTag::trial, t), pair, h);
    alt_cross.add(pair.X(0, 0) * pair.Y(h.sigma[0], 0));
    alt_sq.add(pair.Y(0, 0) * pair.Y(0, 0));
  }
  EXPECT_NEAR(alt_cross.mean(), 0.0, 4.0 * alt_cross.stderr_of_mean());
  EXPECT_NEAR(alt_sq.mean(), 1.0, 4.0 * alt_sq.stderr_of_mean());
}

TEST(Sampling, MatchedCorrelationAndMarginals) {
  // k = n, d = 1, rho = 0.8; 10^6 matched pairs.
  const ModelParams p{10, 1, 10, 0.8};
  MomentAccumulator xy, yy, unmatched, ymean;
  DatabasePair pair;
  HiddenStructure h;
  for (std::uint64_t t = 0; t < 100000; ++t) {
    sample_alternative_into(p, derive_seed(31, SeedTag::trial, t), pair, h);
    for (std::size_t i = 0; i < p.n; ++i) {
      const double x = pair.X(i, 0), y = pair.Y(h.sigma[i], 0);
      xy.add(x * y);
      yy.add(y * y);
      ymean.add(y);
      unmatched.add(x * pair.Y((h.sigma[i] + 1) % p.n, 0));
    }
  }
  EXPECT_NEAR(xy.mean(), 0.8, 5.0 * xy.stderr_of_mean());
  EXPECT_NEAR(yy.mean(), 1.0, 5.0 * yy.stderr_of_mean());
  EXPECT_NEAR(ymean.mean(), 0.0, 5.0 * ymean.stderr_of_mean());
  EXPECT_NEAR(unmatched.mean(), 0.0, 5.0 * unmatched.stderr_of_mean());
}

TEST(Sampling, PartialModelOnlyTouchesK) {
  const ModelParams p{5, 4, 2, 0.9};
  MomentAccumulator in_k, out_k;
  DatabasePair pair;
  HiddenStructure h;
  for (std::uint64_t t = 0; t < 50000; ++t) {
    sample_alternative_into(p, derive_seed(41, SeedTag::trial, t), pair, h);
    for (std::size_t i = 0; i < p.n; ++i) {
      const bool member = std::binary_search(h.K.begin(), h.K.end(), i);
      for (std::size_t j = 0; j < p.d; ++j) (member ? in_k : out_k).add(pair.X(i, j) * pair.Y(h.sigma[i], j));
    }
  }
  EXPECT_NEAR(in_k.mean(), 0.9, 5.0 * in_k.stderr_of_mean());
  EXPECT_NEAR(out_k.mean(), 0.0, 5.0 * out_k.stderr_of_mean());
}

TEST(Sampling, DimensionCheck) {
  const ModelParams p{3, 2, 3, 0.1};
  auto pair = sample_null(p, 1);
  EXPECT_NO_THROW(check_dimensions(pair, p));
  EXPECT_THROW(check_dimensions(pair, ModelParams{4, 2, 3, 0.1}), DimensionError);
  EXPECT_THROW(check_dimensions(pair, ModelParams{3, 1, 3, 0.1}), DimensionError);
}

TEST(Sampling, BinaryDumpRoundTrip) {
  const ModelParams p{4, 3, 2, 0.3};
  const auto pair = sample_null(p, 8);
  std::stringstream ss;
  io::write_pair_binary(ss, pair);
  EXPECT_EQ(ss.str().size(), 16u + 2u * 4u * 3u * 8u);
  const auto back = io::read_pair_binary(ss);
  EXPECT_EQ(back.X.data, pair.X.data);
  EXPECT_EQ(back.Y.data, pair.Y.data);
  std::ostringstream text;
  io::write_pair_csv(text, pair);
  EXPECT_EQ(text.str().substr(0, 17), "matrix,i,j,value\n");
}
