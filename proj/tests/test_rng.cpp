#include <doctest.h>

#include <cmath>
#include <vector>

#include "lloydcvt/numerics.hpp"
#include "lloydcvt/rng.hpp"
#include "oracles.hpp"

using namespace lloydcvt;

TEST_CASE("streams replay exactly and are decoupled") {
  RngStream a(42, streams::kSample);
  RngStream b(42, streams::kSample);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  // Drawing more from one stream never shifts another stream's outputs.
  RngStream c(42, streams::kSplit);
  std::vector<std::uint64_t> first;
  for (int i = 0; i < 16; ++i) first.push_back(c.next_u64());
  RngStream a2(42, streams::kSample);
  for (int i = 0; i < 5000; ++i) a2.next_u64();
  RngStream c2(42, streams::kSplit);
  for (int i = 0; i < 16; ++i) CHECK(c2.next_u64() == first[i]);
}

TEST_CASE("different seeds and streams give different sequences") {
  RngStream a(1, streams::kSample), b(2, streams::kSample), c(1, streams::kSplit);
  int equal_ab = 0, equal_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t va = a.next_u64();
    if (va == b.next_u64()) ++equal_ab;
    if (va == c.next_u64()) ++equal_ac;
  }
  CHECK(equal_ab == 0);
  CHECK(equal_ac == 0);
  CHECK(streams::sub(streams::kInit, 3) != streams::sub(streams::kInit, 4));
}

TEST_CASE("uniform01 range, mean, and KS fit") {
  const std::size_t n = 100000;
  RngStream rng(7, streams::kSample);
  std::vector<double> xs(n);
  double mean = 0.0;
  for (auto& x : xs) {
    x = rng.uniform01();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    mean += x;
  }
  mean /= static_cast<double>(n);
  CHECK(std::fabs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  double ks = oracles::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("normal moments and KS fit") {
  const std::size_t n = 100000;
  RngStream rng(11, streams::kSample);
  std::vector<double> xs(n);
  double m1 = 0.0, m2 = 0.0;
  for (auto& x : xs) {
    x = rng.normal();
    m1 += x;
    m2 += x * x;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::fabs(m1) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::fabs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  double ks = oracles::ks_statistic(xs, [](double x) { return norm_cdf(x); });
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("exponential KS fit") {
  const std::size_t n = 100000;
  RngStream rng(13, streams::kSample);
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.exponential(2.0);
  double ks =
      oracles::ks_statistic(xs, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-2.0 * x); });
  CHECK(ks < 1.628 / std::sqrt(static_cast<double>(n)));
}
