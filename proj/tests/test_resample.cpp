#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "dfscore/resample.hpp"

using namespace dfscore;

namespace {

std::vector<double> offspring(const std::vector<std::size_t>& a, std::size_t m) {
  std::vector<double> c(m, 0.0);
  for (std::size_t i : a) c[i] += 1.0;
  return c;
}

}  // namespace

TEST(Resample, ExpectedOffspringIsProportionalToWeight) {
  const std::vector<double> w = {0.05, 0.4, 0.0, 0.25, 0.3};
  const std::size_t n = w.size();
  const int reps = 4000;
  for (auto scheme : {ResamplingScheme::multinomial, ResamplingScheme::systematic}) {
    Rng rng(17);
    std::vector<double> mean(w.size(), 0.0);
    for (int r = 0; r < reps; ++r) {
      const auto c = offspring(resample(w, scheme, rng), w.size());
      for (std::size_t i = 0; i < w.size(); ++i) mean[i] += c[i] / reps;
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      // multinomial variance bounds the systematic one
      const double se = std::sqrt(n * w[i] * (1 - w[i]) / reps);
      EXPECT_NEAR(mean[i], n * w[i], 5 * se + 1e-12) << to_string(scheme) << " index " << i;
    }
  }
}

TEST(Resample, SystematicCountsAreFloorOrCeil) {
  Rng rng(3);
  std::vector<double> w(37);
  for (int rep = 0; rep < 200; ++rep) {
    double total = 0;
    for (double& x : w) total += (x = rng.uniform() * rng.uniform());
    const std::size_t n = 64;
    std::vector<std::size_t> a(n);
    resample(w, ResamplingScheme::systematic, rng, a);
    const auto c = offspring(a, w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double e = n * w[i] / total;
      EXPECT_GE(c[i], std::floor(e) - 1e-9);
      EXPECT_LE(c[i], std::ceil(e) + 1e-9);
    }
  }
}

TEST(Resample, ZeroWeightsAreNeverChosen) {
  std::vector<double> w(50, 0.0);
  w[7] = 1e-300;
  w[49] = 0.0;
  Rng rng(1);
  for (auto scheme : {ResamplingScheme::multinomial, ResamplingScheme::systematic})
    for (std::size_t a : resample(w, scheme, rng)) EXPECT_EQ(a, 7u);
  std::vector<double> tail = {0.5, 0.5, 0.0};
  for (int r = 0; r < 1000; ++r)
    for (std::size_t a : resample(tail, ResamplingScheme::multinomial, rng)) EXPECT_LT(a, 2u);
}

TEST(Resample, DeterministicGivenSeed) {
  const std::vector<double> w = {0.1, 0.2, 0.3, 0.4};
  Rng a(5), b(5);
  EXPECT_EQ(resample(w, ResamplingScheme::multinomial, a), resample(w, ResamplingScheme::multinomial, b));
  EXPECT_EQ(resample(w, ResamplingScheme::systematic, a), resample(w, ResamplingScheme::systematic, b));
}

TEST(Resample, RejectsInvalidWeights) {
  Rng rng(0);
  std::vector<std::size_t> out(3);
  EXPECT_THROW(resample(std::vector<double>{0.5, -0.1}, ResamplingScheme::multinomial, rng, out), std::invalid_argument);
  EXPECT_THROW(resample(std::vector<double>{0.0, 0.0}, ResamplingScheme::systematic, rng, out), std::invalid_argument);
  EXPECT_THROW(resample(std::vector<double>{std::nan(""), 1.0}, ResamplingScheme::systematic, rng, out),
               std::invalid_argument);
  EXPECT_THROW(resample(std::vector<double>{std::numeric_limits<double>::infinity()}, ResamplingScheme::systematic,
                        rng, out),
               std::invalid_argument);
}

TEST(Resample, SchemeNames) {
  EXPECT_EQ(resampling_scheme_from_string("systematic"), ResamplingScheme::systematic);
  EXPECT_EQ(to_string(ResamplingScheme::multinomial), "multinomial");
  EXPECT_THROW(resampling_scheme_from_string("stratified"), std::invalid_argument);
}
