#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "rwrslab/cantorlab.hpp"
#include "rwrslab/rng.hpp"

using namespace rwrslab;

namespace {

// Exact subfamily-quantifier oracle for meandering, with the definition's
// set distance between block images.
bool oracle_meandering(const std::vector<double>& sigma, int M, double alpha,
                       double ell) {
  const int L = static_cast<int>(sigma.size()) / M;
  const int need = static_cast<int>(std::ceil(alpha * L - 1e-12));
  if (need > L) return true;
  for (std::uint32_t mask = 1; mask < (1u << L); ++mask) {
    if (__builtin_popcount(mask) < need) continue;
    bool has_far_pair = false;
    for (int i = 0; i < L && !has_far_pair; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int j = i + 1; j < L && !has_far_pair; ++j) {
        if (!(mask & (1u << j))) continue;
        double dist = std::numeric_limits<double>::infinity();
        for (int a = 0; a < M; ++a)
          for (int b = 0; b < M; ++b)
            dist = std::min(
                dist, std::abs(sigma[static_cast<std::size_t>(i * M + a)] -
                               sigma[static_cast<std::size_t>(j * M + b)]));
        if (dist > 2.0 * ell) has_far_pair = true;
      }
    }
    if (!has_far_pair) return false;
  }
  return true;
}

RwrsSample synthetic_sample(const std::vector<double>& forward_sums) {
  // Sums over [0; N] provided; the two-sided window is padded with zeros.
  RwrsSample sample;
  const int N = static_cast<int>(forward_sums.size()) - 1;
  sample.N = N;
  sample.pad = 1;
  sample.path.assign(static_cast<std::size_t>(2 * (N + 1) + 1), 0);
  sample.sums.assign(static_cast<std::size_t>(2 * N + 1), 0.0);
  for (int n = 0; n <= N; ++n)
    sample.sums[static_cast<std::size_t>(N + n)] =
        forward_sums[static_cast<std::size_t>(n)];
  sample.site_lo = -256;
  sample.scenery.assign(1024, 0);
  sample.cell_width = 1.0;
  return sample;
}

}  // namespace

TEST_CASE("scale ladders") {
  SUBCASE("paper exponent at depth one") {
    const ScaleLadder ladder = make_ladder(1, 18.0);
    CHECK(ladder.L(1) == 262144);  // ceil(2^18)
    CHECK(ladder.N(1) == doctest::Approx(262144.0));
  }
  SUBCASE("explicit multipliers") {
    const ScaleLadder ladder = make_ladder_explicit({4, 4});
    CHECK(ladder.N(2) == doctest::Approx(16.0));
  }
  SUBCASE("kappa arithmetic") {
    const ScaleLadder ladder = make_ladder_explicit({4, 4, 4, 4, 4, 4});
    CHECK(ladder.kappa(1, 2) == doctest::Approx(8.0 / 9.0));
    // kappa_{r,d} nondecreasing in r, nonincreasing in d.
    for (int d = 2; d <= 6; ++d)
      for (int r = 1; r + 1 < d; ++r)
        CHECK(ladder.kappa(r, d) <= ladder.kappa(r + 1, d) + 1e-12);
    for (int r = 1; r < 5; ++r)
      for (int d = r + 1; d < 6; ++d)
        CHECK(ladder.kappa(r, d + 1) <= ladder.kappa(r, d) + 1e-12);
  }
  SUBCASE("budget guard") {
    CHECK_THROWS(make_ladder(5, 18.0, 1e15));
    CHECK_THROWS(make_ladder_explicit({1, 4}));
  }
}

TEST_CASE("gap bound checking") {
  DiscreteCantorSet set;
  set.depth = 1;
  set.values = {0.0, 5.0};
  CHECK(check_gap_bounds(set, {5.0}).ok);
  const GapCheck bad = check_gap_bounds(set, {4.0});
  CHECK_FALSE(bad.ok);
  CHECK(bad.first_i == 0);
  CHECK(bad.first_j == 1);

  SUBCASE("agrees with an independent pairwise loop") {
    for (int t = 0; t < 200; ++t) {
      RngStream rng(51, "gap", static_cast<std::uint64_t>(t));
      const int depth = 1 + t % 3;
      DiscreteCantorSet s;
      s.depth = depth;
      for (std::size_t i = 0; i < (std::size_t{1} << depth); ++i)
        s.values.push_back(10.0 * rng.next_double());
      std::vector<double> D;
      double cur = 8.0 + 4.0 * rng.next_double();
      for (int level = 0; level < depth; ++level) {
        D.push_back(cur);
        cur *= 0.3 + 0.5 * rng.next_double();
      }
      bool naive = true;
      const std::size_t n = s.values.size();
      for (std::size_t i = 0; i < n && naive; ++i)
        for (std::size_t j = i + 1; j < n && naive; ++j) {
          int prefix = 0;
          for (int b = depth - 1; b >= 0; --b) {
            if (((i >> b) & 1) == ((j >> b) & 1))
              ++prefix;
            else
              break;
          }
          if (std::abs(s.values[i] - s.values[j]) >
              D[static_cast<std::size_t>(prefix)] + 1e-12)
            naive = false;
        }
      CHECK(check_gap_bounds(s, D).ok == naive);
    }
  }
}

TEST_CASE("structure distances") {
  DiscreteCantorSet a;
  a.depth = 2;
  a.values = {0.0, 1.0, 3.0, 4.0};
  CHECK(structure_distance(a, a) == 0.0);
  DiscreteCantorSet shifted = a;
  for (auto& v : shifted.values) v += 1.5;
  CHECK(structure_distance(a, shifted) == doctest::Approx(1.5));

  DiscreteCantorFamily f;
  f.depth = 1;
  f.intervals = {{0.0, 1.0}, {2.0, 3.0}};
  DiscreteCantorFamily g = f;
  g.intervals[1] = {2.5, 3.2};
  CHECK(structure_distance(f, g) == doctest::Approx(0.5));
}

TEST_CASE("covering bound formula") {
  CHECK(covering_bound_formula(CantorKind::kSet, 100.0, {20.0}, 2.0) ==
        doctest::Approx(2000.0));
  CHECK(covering_bound_formula(CantorKind::kFamily, 100.0, {20.0}, 2.0) ==
        doctest::Approx(4.0e6));
  CHECK(covering_bound_formula(CantorKind::kMatching, 100.0, {20.0}, 2.0) ==
        doctest::Approx(8.0e9));
  // Validity window: delta must stay below D_d / 10 and L / 10.
  CHECK_THROWS(covering_bound_formula(CantorKind::kSet, 100.0, {20.0}, 3.0));
  CHECK_THROWS(covering_bound_formula(CantorKind::kSet, 15.0, {20.0}, 2.0));
}

TEST_CASE("integer discrete Cantor enumeration") {
  SUBCASE("hand-counted depth-1 example") {
    // Pairs in {0..3} within distance 1: 4 diagonal + 2*3 adjacent.
    const IntegerDcsCount count = enumerate_dcs_integer(0, 3, {1}, 1);
    CHECK(count.count == 10);
  }
  SUBCASE("zero gap keeps only the diagonal") {
    const IntegerDcsCount count = enumerate_dcs_integer(0, 3, {0}, 1);
    CHECK(count.count == 4);
  }
  SUBCASE("budget guard") {
    CHECK_THROWS(enumerate_dcs_integer(0, 200, {100, 100, 100}, 3));
  }
  SUBCASE("count never exceeds the normalized formula product") {
    for (int t = 0; t < 30; ++t) {
      RngStream rng(52, "dcs", static_cast<std::uint64_t>(t));
      const int depth = 1 + t % 2;
      const long long len = 2 + static_cast<long long>(rng.next_below(8));
      std::vector<long long> D;
      long long cur = 1 + static_cast<long long>(
                              rng.next_below(static_cast<std::uint64_t>(len)));
      for (int level = 0; level < depth; ++level) {
        D.push_back(cur);
        cur = 1 + static_cast<long long>(
                      rng.next_below(static_cast<std::uint64_t>(cur)));
      }
      const IntegerDcsCount count = enumerate_dcs_integer(0, len, D, depth);
      double bound = 2.0 * static_cast<double>(len);
      double power = 1.0;
      for (std::size_t i = 0; i < D.size(); ++i) {
        bound *= std::pow(2.0 * static_cast<double>(D[i]), power);
        power = (i == 0) ? 2.0 : power * 2.0;
      }
      CHECK(static_cast<double>(count.count) <= bound);
    }
  }
}

TEST_CASE("meandering detection") {
  SUBCASE("vacuous when alpha L exceeds L") {
    std::vector<double> sigma(8, 0.0);
    CHECK(is_meandering(sigma, 2, 1.5, 1.0));
  }
  SUBCASE("zero cocycle never meanders at feasible alpha") {
    std::vector<double> sigma(16, 0.0);
    CHECK_FALSE(is_meandering(sigma, 2, 0.5, 1.0));
  }
  SUBCASE("agrees with the brute-force subfamily quantifier") {
    for (int t = 0; t < 150; ++t) {
      RngStream rng(53, "meander", static_cast<std::uint64_t>(t));
      const int L = 2 + static_cast<int>(rng.next_below(11));
      const int M = 1 + static_cast<int>(rng.next_below(3));
      const double ell = 0.5 + rng.next_double();
      std::vector<double> sigma(static_cast<std::size_t>(L * M));
      double value = 0.0;
      for (auto& s : sigma) {
        s = value;
        value += (2.0 * rng.next_double() - 1.0) * ell;
      }
      const double alpha = 0.15 + rng.next_double();
      CHECK(is_meandering(sigma, M, alpha, ell) ==
            oracle_meandering(sigma, M, alpha, ell));
    }
  }
  SUBCASE("frequency estimate is a probability with a CI") {
    const MeanderFrequency f =
        meandering_frequency(srw_process(1), 8, 16, 0.5, 1.0, 400, 54);
    CHECK(f.value >= 0.0);
    CHECK(f.value <= 1.0);
    CHECK(f.ci_lo <= f.value);
    CHECK(f.value <= f.ci_hi);
  }
}

TEST_CASE("good time sets") {
  const ScaleLadder ladder = make_ladder_explicit({8, 8, 8});
  GoodTimeParams params;
  params.r = 1;
  params.d = 3;
  params.ell = 1.0;

  SUBCASE("zero cocycle has empty meander sets") {
    ProcessModel process = srw_process(1);
    process.cocycle.table = {0.0, 0.0};
    const RwrsSample sample = sample_rwrs(process, 512, 55, 0);
    const GoodTimeSets sets = good_time_sets(sample, ladder, params);
    for (char flag : sets.meander) CHECK_FALSE(flag);
  }

  SUBCASE("block flags cover whole blocks and the fraction is consistent") {
    const ProcessModel process = srw_process(1);
    const RwrsSample sample = sample_rwrs(process, 512, 56, 0);
    const GoodTimeSets sets = good_time_sets(sample, ladder, params);
    REQUIRE(sets.all.size() == 64);  // N_3 / N_1 = 512 / 8
    long long good = 0;
    for (char flag : sets.all)
      if (flag) ++good;
    CHECK(sets.combined_fraction ==
          doctest::Approx(static_cast<double>(good * 8) / 512.0));
  }

  SUBCASE("triple intersection grows with the base scale r") {
    const ProcessModel process = srw_process(1);
    double frac_r1 = 0.0, frac_r2 = 0.0;
    for (int t = 0; t < 30; ++t) {
      const RwrsSample sample =
          sample_rwrs(process, 512, 57, static_cast<std::uint64_t>(t));
      GoodTimeParams p1 = params;
      p1.r = 1;
      GoodTimeParams p2 = params;
      p2.r = 2;
      frac_r1 += good_time_sets(sample, ladder, p1).combined_fraction;
      frac_r2 += good_time_sets(sample, ladder, p2).combined_fraction;
    }
    CHECK(frac_r2 / 30.0 >= frac_r1 / 30.0 - 0.05);
  }
}

TEST_CASE("adapted family search") {
  const ScaleLadder ladder = make_ladder_explicit({4, 2});

  SUBCASE("base clause returns a separated pair") {
    // Depth d = 2, r = 1: blocks of length 4 inside [0;8); build sums whose
    // two blocks have images far apart.
    std::vector<double> sums(9, 0.0);
    for (int n = 0; n <= 8; ++n)
      sums[static_cast<std::size_t>(n)] = n < 4 ? 0.0 : 50.0;
    const RwrsSample sample = synthetic_sample(sums);
    const AdaptedFamilySearch search =
        find_adapted_family({0, 1}, sample, ladder, 1, 2, 1.0);
    REQUIRE(search.success);
    CHECK(search.family.block_index == std::vector<long long>{0, 1});
  }

  SUBCASE("zero cocycle fails at the top scale") {
    std::vector<double> sums(9, 0.0);
    const RwrsSample sample = synthetic_sample(sums);
    const AdaptedFamilySearch search =
        find_adapted_family({0, 1}, sample, ladder, 1, 2, 1.0);
    CHECK_FALSE(search.success);
    CHECK(search.failed_scale == 2);
  }

  SUBCASE("returned families verify on random SRW samples") {
    const ScaleLadder srw_ladder = make_ladder_explicit({8, 8, 8});
    const ProcessModel process = srw_process(1);
    int successes = 0;
    for (int t = 0; t < 40; ++t) {
      const RwrsSample sample =
          sample_rwrs(process, 512, 58, static_cast<std::uint64_t>(t));
      std::vector<long long> all_blocks;
      for (long long b = 0; b < 64; ++b) all_blocks.push_back(b);
      const AdaptedFamilySearch search =
          find_adapted_family(all_blocks, sample, srw_ladder, 1, 3, 1.0);
      if (search.success) {
        ++successes;
        CHECK(verify_adapted_family(search.family, sample, srw_ladder, 1.0));
        // Declared gap bounds hold for both stored interval families.
        std::vector<double> gaps = {512.0, 64.0};
        CHECK(check_gap_bounds(search.family.block_intervals, gaps).ok);
        std::vector<double> image_gaps = {4.0 * 512.0, 4.0 * 64.0};
        CHECK(check_gap_bounds(search.family.image_intervals, image_gaps).ok);
        CHECK(search.family.image_intervals.pairwise_disjoint());
      }
    }
    CHECK(successes > 0);
  }
}

TEST_CASE("cover with families") {
  SUBCASE("single family covering most of the range stops at |G| = 1") {
    const ScaleLadder ladder = make_ladder_explicit({2, 2});
    std::vector<double> sums = {0.0, 0.2, 10.0, 10.2, 10.4};
    const RwrsSample sample = synthetic_sample(sums);
    CoverParams params;
    params.r = 1;
    params.d = 2;
    params.ell = 0.5;
    params.eta = 0.95;
    const FamilyCover cover =
        cover_with_families(sample, {0, 1}, ladder, params);
    CHECK(cover.success);
    CHECK(cover.families.size() == 1);
    CHECK(cover.residual <= params.eta * cover.range_length + 1e-9);
  }

  SUBCASE("verified properties on SRW samples") {
    const ScaleLadder ladder = make_ladder_explicit({8, 8, 8});
    const ProcessModel process = srw_process(1);
    CoverParams params;
    params.r = 1;
    params.d = 3;
    params.ell = 1.0;
    params.eta = 0.3;
    GoodTimeParams gt;
    gt.r = 1;
    gt.d = 3;
    gt.ell = 1.0;
    int successes = 0;
    for (int t = 0; t < 30; ++t) {
      const RwrsSample sample =
          sample_rwrs(process, 512, 59, static_cast<std::uint64_t>(t));
      const GoodTimeSets sets = good_time_sets(sample, ladder, gt);
      std::vector<long long> good;
      for (std::size_t b = 0; b < sets.all.size(); ++b)
        if (sets.all[b]) good.push_back(static_cast<long long>(b));
      if (good.empty()) continue;
      const FamilyCover cover = cover_with_families(sample, good, ladder, params);
      if (cover.success) {
        ++successes;
        CHECK(verify_family_cover(cover, sample, ladder, params));
      }
    }
    CHECK(successes > 0);
  }
}

TEST_CASE("matching extraction") {
  const ScaleLadder ladder = make_ladder_explicit({8, 8, 8});
  const ProcessModel process = srw_process(2);
  MatchingParams params;
  params.r = 1;
  params.d = 3;
  params.ell = 1.0;
  params.eta = 0.3;
  params.delta = 0.1;

  SUBCASE("identity input gives zero offsets and exact agreement") {
    int successes = 0;
    for (int t = 0; t < 12; ++t) {
      const RwrsSample sample =
          sample_rwrs(process, 512, 60, static_cast<std::uint64_t>(t));
      const MatchingExtraction out =
          extract_matchings(sample, sample, process, ladder, params);
      CHECK(out.agreement_fraction == doctest::Approx(1.0));
      if (!out.success) continue;
      ++successes;
      CHECK(out.p1_ok);
      CHECK(out.p2_ok);
      CHECK(out.p3_ok);
      for (const auto& matching : out.matchings) {
        for (double u : matching.offsets.values) CHECK(u == 0.0);
        // Declared matching gap bounds 4 ell (N_d >= ... >= N_{r+1}).
        std::vector<double> gaps = {4.0 * 512.0, 4.0 * 64.0};
        CHECK(check_gap_bounds(matching, gaps).ok);
      }
    }
    CHECK(successes > 0);
  }

  SUBCASE("a global scenery shift with a flipped first step appears in the offsets") {
    int attempts = 0, checked = 0;
    for (int t = 0; t < 30 && checked < 3; ++t) {
      const RwrsSample a =
          sample_rwrs(process, 512, 61, static_cast<std::uint64_t>(t));
      // Flip the time-0 step: sigma'_n = sigma_n + shift for all n >= 1.
      RwrsSample b = a;
      const std::size_t origin = static_cast<std::size_t>(b.N + b.pad);
      b.path[origin] = static_cast<int8_t>(1 - b.path[origin]);
      b.sums = cocycle_sums(b.path, b.N, b.pad, process.cocycle, 2);
      const double shift = b.sum(1) - a.sum(1);
      REQUIRE(std::abs(std::abs(shift) - 2.0) < 1e-12);
      // Shift the scenery so the walker reads the same colours after time 0.
      b.site_lo = a.site_lo + static_cast<std::int64_t>(shift);
      ++attempts;
      const MatchingExtraction out =
          extract_matchings(a, b, process, ladder, params);
      if (!out.success || out.matchings.empty()) continue;
      ++checked;
      for (const auto& matching : out.matchings)
        for (std::size_t w = 0; w < matching.offsets.values.size(); ++w)
          CHECK(matching.offsets.values[w] == doctest::Approx(shift));
      CHECK(out.p3_ok);
    }
    CHECK(attempts > 0);
    CHECK(checked > 0);
  }
}

TEST_CASE("cantor JSON serialization") {
  DiscreteCantorMatching matching;
  matching.family.depth = 1;
  matching.family.intervals = {{0.0, 1.0}, {5.0, 6.0}};
  matching.offsets.depth = 1;
  matching.offsets.values = {0.5, -0.5};
  const std::string json = cantor_to_json(matching, "unit-test");
  CHECK(json.find("\"depth\":1") != std::string::npos);
  CHECK(json.find("unit-test") != std::string::npos);
}
