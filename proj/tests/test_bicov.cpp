#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rwrslab/bicov.hpp"
#include "rwrslab/rng.hpp"

using namespace rwrslab;

namespace {

SampledPairSpace random_space(RngStream& rng, std::size_t m) {
  SampledPairSpace space;
  space.weights.assign(m, 1.0 / static_cast<double>(m));
  space.dist1 = DistanceMatrix(m);
  space.dist2 = DistanceMatrix(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d1 = rng.next_double();
      const double d2 = rng.next_double();
      space.dist1(i, j) = d1;
      space.dist1(j, i) = d1;
      space.dist2(i, j) = d2;
      space.dist2(j, i) = d2;
    }
  return space;
}

}  // namespace

TEST_CASE("competition config validation") {
  CompetitionConfig config;
  CHECK_NOTHROW(config.validate());
  config.alpha = 0.5;
  CHECK_THROWS(config.validate());
  config.alpha = 2.0;
  config.kappa_prime = 0.6;
  CHECK_THROWS(config.validate());
}

TEST_CASE("miner candidates") {
  const ProcessModel process = srw_process(2);
  const int N = 32;
  const std::size_t m = 120;
  const std::vector<RwrsSample> samples = sample_rwrs_batch(process, N, m, 2024);
  const SampledPairSpace space = pair_space_from_samples(samples, process, N);

  SUBCASE("alpha = 1 only allows the original weights") {
    const auto candidates =
        miner_candidates(space, &samples, &process, 1.0, 8, 1);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].id == "original");
  }

  SUBCASE("every candidate satisfies the entrywise density bound") {
    const double alpha = 2.0;
    const auto candidates =
        miner_candidates(space, &samples, &process, alpha, 8, 1);
    CHECK(candidates.size() >= 2);
    for (const auto& candidate : candidates) {
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        CHECK(candidate.weights[i] <= alpha * space.weights[i] + 1e-9);
        CHECK(candidate.weights[i] >= -1e-12);
        total += candidate.weights[i];
      }
      CHECK(total == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("maxer subsets keep the required mass") {
  RngStream rng(71, "maxer", 0);
  const SampledPairSpace space = random_space(rng, 40);
  const double kappa = 0.5;
  const auto subsets = maxer_subsets(space, space.weights, kappa, 0.3, 3, 9);
  CHECK(subsets.size() >= 2);
  bool full_seen = false;
  for (const auto& [mask, id] : subsets) {
    double mass = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) mass += space.weights[i];
    CHECK(mass >= kappa - 1e-9);
    if (id == "full") {
      full_seen = true;
      for (char c : mask) CHECK(c == 1);
    }
  }
  CHECK(full_seen);
  // kappa = 1 leaves the full space as the only usable choice.
  const auto tight = maxer_subsets(space, space.weights, 1.0, 0.3, 2, 9);
  for (const auto& [mask, id] : tight) {
    double mass = 0.0;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) mass += space.weights[i];
    if (id == "full") CHECK(mass == doctest::Approx(1.0));
  }
}

TEST_CASE("profile estimation") {
  SUBCASE("degenerate future metric collapses to one") {
    RngStream rng(72, "prof", 0);
    SampledPairSpace space = random_space(rng, 30);
    space.dist2 = DistanceMatrix(30, 0.0);
    CompetitionConfig config;
    config.delta = 0.05;
    const BicovProfileResult result = estimate_bicov_profile(space, config);
    CHECK(result.value == 1);
    CHECK(result.verify(space, config));
  }

  SUBCASE("heuristic value dominates the exact value") {
    for (int t = 0; t < 20; ++t) {
      RngStream rng(73, "prof2", static_cast<std::uint64_t>(t));
      const SampledPairSpace space = random_space(rng, 9);
      CompetitionConfig config;
      config.alpha = 2.0;
      config.kappa = 0.5;
      config.kappa_prime = 0.25;
      config.delta = 0.25 + 0.3 * rng.next_double();
      config.exact_inner = true;
      const BicovProfileResult exact = exact_bicov_profile(space, config);
      const BicovProfileResult heuristic = estimate_bicov_profile(space, config);
      CHECK(heuristic.value >= exact.value);
      CHECK(exact.exact);
      CHECK(exact.verify(space, config));
      CHECK(heuristic.verify(space, config));
    }
  }
}

TEST_CASE("exact profile edge cases") {
  CompetitionConfig config;
  config.delta = 0.5;

  SUBCASE("single point") {
    SampledPairSpace space;
    space.weights = {1.0};
    space.dist1 = DistanceMatrix(1);
    space.dist2 = DistanceMatrix(1);
    CHECK(exact_bicov_profile(space, config).value == 1);
  }

  SUBCASE("two far atoms with a small inner target") {
    SampledPairSpace space;
    space.weights = {0.5, 0.5};
    space.dist1 = DistanceMatrix(2, 100.0);
    space.dist2 = DistanceMatrix(2, 100.0);
    space.dist1(0, 0) = space.dist1(1, 1) = 0.0;
    space.dist2(0, 0) = space.dist2(1, 1) = 0.0;
    config.kappa = 0.5;
    config.kappa_prime = 0.25;
    CHECK(exact_bicov_profile(space, config).value == 1);
  }
}

TEST_CASE("factor maps do not increase the profile") {
  // Source: product of a 3-point "walk" line and a 2-point "scenery" bit;
  // target: the walk line alone.  The projection is 1-pair-Lipschitz, and
  // Min-er can do at the source at least as well as at the target with a
  // slightly смaller alpha and suitable kappa_1, delta_1 in the sweep.
  const std::size_t walk = 3, bits = 2;
  SampledPairSpace source;
  source.weights.assign(walk * bits, 1.0 / static_cast<double>(walk * bits));
  source.dist1 = DistanceMatrix(walk * bits);
  source.dist2 = DistanceMatrix(walk * bits);
  SampledPairSpace target;
  target.weights.assign(walk, 1.0 / static_cast<double>(walk));
  target.dist1 = DistanceMatrix(walk);
  target.dist2 = DistanceMatrix(walk);
  for (std::size_t a = 0; a < walk; ++a)
    for (std::size_t b = 0; b < walk; ++b) {
      const double dw = std::abs(static_cast<double>(a) -
                                 static_cast<double>(b)) /
                        2.0;
      target.dist1(a, b) = dw;
      target.dist2(a, b) = dw;
      for (std::size_t i = 0; i < bits; ++i)
        for (std::size_t j = 0; j < bits; ++j) {
          const double ds = i == j ? 0.0 : 0.4;
          source.dist1(a * bits + i, b * bits + j) = dw + ds;
          source.dist2(a * bits + i, b * bits + j) = dw + ds;
        }
    }
  CompetitionConfig target_config;
  target_config.alpha = 2.0;
  target_config.kappa = 0.5;
  target_config.kappa_prime = 0.2;
  target_config.delta = 0.3;
  const std::size_t target_value =
      exact_bicov_profile(target, target_config).value;

  bool witnessed = false;
  for (double alpha1 : {1.2, 1.5}) {
    for (double kappa1 : {0.25, 0.35, 0.45}) {
      if (!(kappa1 > target_config.kappa_prime && kappa1 < target_config.kappa))
        continue;
      for (double delta1 : {0.1, 0.2, 0.3}) {
        CompetitionConfig source_config = target_config;
        source_config.alpha = alpha1;
        source_config.kappa = kappa1;
        source_config.delta = delta1;
        if (exact_bicov_profile(source, source_config).value >= target_value)
          witnessed = true;
      }
    }
  }
  CHECK(witnessed);
}

TEST_CASE("rate curve smoke test") {
  const ProcessModel process = srw_process(2);
  CompetitionConfig config;
  config.delta = 0.1;
  const RateCurve curve =
      rate_curve(process, {8, 16}, config, 60, {1, 2}, 1);
  REQUIRE(curve.points.size() == 2);
  for (const auto& point : curve.points) {
    CHECK(std::isfinite(point.mean_log_value));
    CHECK(point.per_seed_log_values.size() == 2);
  }
  CHECK(std::isfinite(curve.slope));
}
