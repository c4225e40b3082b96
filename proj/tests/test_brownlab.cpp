#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <algorithm>
#include "rwrslab/bicov.hpp"
#include "rwrslab/brownlab.hpp"

using namespace rwrslab;

TEST_CASE("brownian sampling") {
  const int n = 256;
  const std::size_t count = 40000;
  const auto paths = sample_brownian(n, count, 1001);

  SUBCASE("endpoint variance is one") {
    double second = 0.0;
    for (const auto& path : paths) {
      const double end = path.values.back();
      second += end * end;
    }
    second /= static_cast<double>(count);
    // Var of the variance estimator is 2/count.
    CHECK(std::abs(second - 1.0) <=
          4.0 * std::sqrt(2.0 / static_cast<double>(count)));
  }

  SUBCASE("expected maximum matches the reflection value up to grid bias") {
    double mean_max = 0.0;
    for (const auto& path : paths) {
      double hi = 0.0;
      for (double v : path.values) hi = std::max(hi, v);
      mean_max += hi;
    }
    mean_max /= static_cast<double>(count);
    // E max B = E|N(0,1)| = 0.7979; the n-step skeleton sits lower by
    // about 0.5826/sqrt(n).
    const double expected = 0.797885 - 0.5826 / std::sqrt(static_cast<double>(n));
    CHECK(mean_max == doctest::Approx(expected).epsilon(0.02));
  }

  SUBCASE("fixed seed is deterministic") {
    const auto again = sample_brownian(n, 10, 1001);
    for (std::size_t i = 0; i < 10; ++i)
      CHECK(again[i].values == paths[i].values);
  }
}

TEST_CASE("overlap and aspect") {
  BrownianPath a, b;
  a.n = b.n = 4;
  a.values = {0.0, 0.5, 1.0, 0.5, 0.25};
  b.values = a.values;
  const OverlapAspect same = overlap_and_aspect(a.values, b.values);
  CHECK(same.overlap == doctest::Approx(1.0));
  CHECK(same.aspect == doctest::Approx(1.0));

  b.values = {0.0, -0.5, -1.0, -1.5, -2.0};
  const OverlapAspect disjoint = overlap_and_aspect(a.values, b.values);
  CHECK(disjoint.overlap == doctest::Approx(0.0));
  CHECK(disjoint.aspect == doctest::Approx(0.0));

  SUBCASE("matches the interval-intersection oracle on random pairs") {
    const auto paths = sample_brownian(64, 40, 1002);
    for (std::size_t i = 0; i + 1 < paths.size(); i += 2) {
      const auto& u = paths[i].values;
      const auto& v = paths[i + 1].values;
      const OverlapAspect oa = overlap_and_aspect(u, v);
      const double lo_u = *std::min_element(u.begin(), u.end());
      const double hi_u = *std::max_element(u.begin(), u.end());
      const double lo_v = *std::min_element(v.begin(), v.end());
      const double hi_v = *std::max_element(v.begin(), v.end());
      const double inter =
          std::max(0.0, std::min(hi_u, hi_v) - std::max(lo_u, lo_v));
      CHECK(oa.overlap == doctest::Approx(inter));
      if (inter > 0.0)
        CHECK(oa.aspect ==
              doctest::Approx(std::min(inter / (hi_u - lo_u),
                                       inter / (hi_v - lo_v))));
    }
  }
}

TEST_CASE("psi_BM quantiles") {
  SUBCASE("alpha = 1 gives the infinity sentinel") {
    const QuantileEstimate q = psi_bm_quantile(1.0, 128, 100, 1003);
    CHECK(std::isinf(q.value));
  }

  SUBCASE("strictly decreasing in alpha") {
    double prev = 1e18;
    for (double alpha : {1.25, 1.5, 2.0, 4.0, 8.0}) {
      const QuantileEstimate q = psi_bm_quantile(alpha, 512, 20000, 1004);
      CHECK(std::isfinite(q.value));
      CHECK(q.value < prev);
      CHECK(q.ci_lo <= q.value);
      CHECK(q.value <= q.ci_hi);
      prev = q.value;
    }
  }
}

TEST_CASE("Berry-Esseen gap") {
  SUBCASE("exact two-atom law at N = 1") {
    const double gap = berry_esseen_gap_of_law({-1.0, 1.0}, {0.5, 0.5});
    // sup_t |F(t) - Phi(t)| = Phi(1) - 1/2 = 0.3413447.
    CHECK(gap == doctest::Approx(0.3413447).epsilon(1e-6));
  }

  SUBCASE("sampled walk at N = 1 is close to the exact gap") {
    const double gap = berry_esseen_gap(srw_process(1), 1, 40000, 1005);
    CHECK(gap == doctest::Approx(0.3413).epsilon(0.02));
  }

  SUBCASE("gap shrinks with N") {
    const ProcessModel process = srw_process(1);
    const double g16 = berry_esseen_gap(process, 16, 30000, 1006);
    const double g256 = berry_esseen_gap(process, 256, 30000, 1006);
    CHECK(g16 > g256);
    CHECK(g256 > 0.0);
  }
}

TEST_CASE("invariance gaps") {
  SUBCASE("SRW endpoint at moderate N") {
    const auto gaps = invariance_gap(srw_process(1), 256, 20000, 1007, 40000);
    REQUIRE(gaps.size() == 3);
    for (const auto& gap : gaps) {
      CHECK_FALSE(gap.degenerate);
      CHECK(gap.ks < 0.08);
    }
  }

  SUBCASE("coboundary cocycle is flagged degenerate") {
    ProcessModel process = srw_process(1);
    process.cocycle.range = 2;
    process.cocycle.table = {0.0, 1.0, -1.0, 0.0};
    const auto gaps = invariance_gap(process, 256, 2000, 1008, 2000);
    CHECK(gaps[0].degenerate);
  }
}

TEST_CASE("max tail frequency") {
  const ProcessModel process = srw_process(1);
  SUBCASE("huge threshold is never hit") {
    const FrequencyEstimate f = max_tail_frequency(process, 64, 50.0, 4000, 1009);
    CHECK(f.value == doctest::Approx(0.0));
  }
  SUBCASE("nonincreasing in b") {
    double prev = 1.1;
    for (double b : {0.5, 1.0, 2.0, 4.0}) {
      const FrequencyEstimate f = max_tail_frequency(process, 64, b, 4000, 1010);
      CHECK(f.value <= prev + 1e-12);
      prev = f.value;
    }
  }
  SUBCASE("frequency times b^2 stays bounded") {
    double fitted = 0.0;
    for (double b : {1.0, 2.0, 4.0}) {
      const FrequencyEstimate f = max_tail_frequency(process, 256, b, 8000, 1011);
      fitted = std::max(fitted, f.value * b * b);
    }
    CHECK(fitted < 4.0);
  }
}

TEST_CASE("fourth moment ratio") {
  const ProcessModel process = srw_process(1);
  SUBCASE("N = 1 is exactly one") {
    const RatioEstimate r = fourth_moment_ratio(process, 1, 2000, 1012);
    CHECK(r.value == doctest::Approx(1.0));
  }
  SUBCASE("approaches the Gaussian fourth moment") {
    const RatioEstimate r = fourth_moment_ratio(process, 256, 40000, 1013);
    // E sigma_N^4 = 3N^2 - 2N for the SRW.
    CHECK(r.value == doctest::Approx(3.0 - 2.0 / 256.0).epsilon(0.1));
  }
  SUBCASE("bounded over a sweep") {
    for (int N = 16; N <= 1024; N *= 4) {
      const RatioEstimate r = fourth_moment_ratio(process, N, 10000, 1014);
      CHECK(r.value < 4.0);
    }
  }
}

TEST_CASE("theoretical rate from the reference table") {
  const std::vector<PsiReferenceEntry> table = {
      {1.25, 1.2, 1.19, 1.21}, {2.0, 0.8, 0.79, 0.81}, {8.0, 0.3, 0.29, 0.31}};
  CHECK(theoretical_rate(2.0, 0.0, table) == 0.0);
  CHECK(std::isinf(theoretical_rate(1.0, 0.7, table)));
  CHECK(theoretical_rate(1.0, 0.0, table) == 0.0);
  CHECK(theoretical_rate(2.0, 0.5, table) == doctest::Approx(0.4));
  CHECK(theoretical_rate(2.0, 1.0, table) ==
        doctest::Approx(2.0 * theoretical_rate(2.0, 0.5, table)));
  double prev = 1e18;
  for (double alpha : {1.25, 1.5, 2.0, 5.0, 8.0}) {
    const double rate = theoretical_rate(alpha, 1.0, table);
    CHECK(rate < prev);
    prev = rate;
  }
  CHECK_THROWS(theoretical_rate(16.0, 1.0, table));
}
