#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "rwrslab/infotools.hpp"
#include "rwrslab/rng.hpp"

using namespace rwrslab;

namespace {

std::vector<double> random_distribution(RngStream& rng, std::size_t k) {
  std::vector<double> p(k, 0.0);
  double total = 0.0;
  for (auto& x : p) {
    x = 0.05 + rng.next_double();
    total += x;
  }
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace

TEST_CASE("entropy closed forms") {
  CHECK(entropy({1.0, 0.0, 0.0}) == doctest::Approx(0.0));
  CHECK(entropy({0.25, 0.25, 0.25, 0.25}) == doctest::Approx(std::log(4.0)));
  // -(1/4) log(1/4) - (3/4) log(3/4) = 0.562335 nats.
  CHECK(entropy({0.25, 0.75}) == doctest::Approx(0.562335).epsilon(1e-5));
}

TEST_CASE("KL divergence") {
  CHECK(kl_divergence({0.3, 0.7}, {0.3, 0.7}) == doctest::Approx(0.0));
  CHECK(std::isinf(kl_divergence({0.5, 0.5}, {1.0, 0.0})));
  // 0.5 log 2 + 0.5 log(2/3) = 0.143841 nats.
  CHECK(kl_divergence({0.5, 0.5}, {0.25, 0.75}) ==
        doctest::Approx(0.143841).epsilon(1e-5));
}

TEST_CASE("approximate absolute continuity") {
  const std::vector<double> p = {0.5, 0.5};
  CHECK(approx_abs_continuity(p, p, 1.0, 0.0).holds);

  SUBCASE("transitivity with multiplied constants") {
    for (int t = 0; t < 100; ++t) {
      RngStream rng(31, "absct", static_cast<std::uint64_t>(t));
      const std::size_t k = 5;
      const auto p1 = random_distribution(rng, k);
      const auto p2 = random_distribution(rng, k);
      const auto p3 = random_distribution(rng, k);
      const double m1 = 1.0 + rng.next_double();
      const double m2 = 1.0 + rng.next_double();
      const double e1 = approx_abs_continuity(p1, p2, m1, 0.0).excess + 1e-12;
      const double e2 = approx_abs_continuity(p2, p3, m2, 0.0).excess + 1e-12;
      CHECK(approx_abs_continuity(p1, p2, m1, e1).holds);
      CHECK(approx_abs_continuity(p2, p3, m2, e2).holds);
      CHECK(approx_abs_continuity(p1, p3, m1 * m2, m1 * e2 + e1).holds);
    }
  }

  SUBCASE("stability under convolution on grid measures") {
    for (int t = 0; t < 50; ++t) {
      RngStream rng(32, "absct2", static_cast<std::uint64_t>(t));
      const std::size_t k = 6;
      const auto p = random_distribution(rng, k);
      const auto q = random_distribution(rng, k);
      const auto theta = random_distribution(rng, 3);
      const double M = 1.0 + rng.next_double();
      const double eps = approx_abs_continuity(p, q, M, 0.0).excess + 1e-12;
      std::vector<double> cp(k + 2, 0.0), cq(k + 2, 0.0);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          cp[i + j] += p[i] * theta[j];
          cq[i + j] += q[i] * theta[j];
        }
      CHECK(approx_abs_continuity(cp, cq, M, eps + 1e-9).holds);
    }
  }
}

TEST_CASE("uniform integrability bound") {
  const auto [M, eps] = uniform_integrability_bound(0.0, 1.0);
  CHECK(M == doctest::Approx(std::exp(1.0)));
  CHECK(eps == doctest::Approx(std::exp(-1.0)));

  SUBCASE("eps decreases in C") {
    double prev = 1e18;
    for (double C : {0.5, 1.0, 2.0, 4.0}) {
      const auto [m2, e2] = uniform_integrability_bound(0.3, C);
      CHECK(e2 < prev);
      prev = e2;
    }
  }

  SUBCASE("validated against approximate absolute continuity") {
    for (int t = 0; t < 200; ++t) {
      RngStream rng(33, "uib", static_cast<std::uint64_t>(t));
      const std::size_t k = 6;
      const auto q = random_distribution(rng, k);
      const auto p = random_distribution(rng, k);
      const double D = kl_divergence(p, q);
      const double C = 0.5 + 2.0 * rng.next_double();
      const auto [M, eps] = uniform_integrability_bound(D, C);
      CHECK(approx_abs_continuity(p, q, M, eps).holds);
    }
  }
}

TEST_CASE("mutual information estimators") {
  SUBCASE("identical partitions give the entropy") {
    const std::vector<int> labels = {0, 1, 1, 2, 0, 2, 1, 0};
    CHECK(mutual_information(labels, labels) ==
          doctest::Approx(label_entropy(labels)));
  }

  SUBCASE("independent product sampling is near zero") {
    RngStream rng(34, "mi", 2);
    const std::size_t n = 50000;
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.next_below(4));
      b[i] = static_cast<int>(rng.next_below(4));
    }
    const double info = mutual_information(a, b);
    const double bound = plugin_bias_bound(4, 4, n);
    CHECK(info <= 3.0 * bound);  // the bias bound is the mean of the plug-in
  }

  SUBCASE("plug-in equals the barycentric KL form") {
    for (int t = 0; t < 30; ++t) {
      RngStream rng(35, "mi2", static_cast<std::uint64_t>(t));
      // Exact joint on 3x4 outcomes encoded as weighted labelings.
      const std::size_t cells = 12;
      auto joint = random_distribution(rng, cells);
      std::vector<int> pa(cells), qa(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        pa[c] = static_cast<int>(c % 3);
        qa[c] = static_cast<int>(c / 3);
      }
      const double plug = mutual_information(pa, qa, &joint);
      // Oracle: integral of KL(row conditional | marginal of Q).
      std::vector<double> q_marginal(4, 0.0);
      for (std::size_t c = 0; c < cells; ++c)
        q_marginal[static_cast<std::size_t>(qa[c])] += joint[c];
      double oracle = 0.0;
      for (int p = 0; p < 3; ++p) {
        double mass = 0.0;
        std::vector<double> row(4, 0.0);
        for (std::size_t c = 0; c < cells; ++c)
          if (pa[c] == p) {
            mass += joint[c];
            row[static_cast<std::size_t>(qa[c])] += joint[c];
          }
        if (mass <= 0.0) continue;
        for (auto& x : row) x /= mass;
        oracle += mass * kl_divergence(row, q_marginal);
      }
      CHECK(plug == doctest::Approx(oracle).epsilon(1e-9));
    }
  }

  SUBCASE("additivity over independent products") {
    RngStream rng(36, "mi3", 1);
    const std::size_t n = 60000;
    std::vector<int> p1(n), q1(n), p2(n), q2(n), pp(n), qq(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Correlated pair 1 and correlated pair 2, independent of each other.
      const int z1 = static_cast<int>(rng.next_below(2));
      p1[i] = z1;
      q1[i] = rng.next_double() < 0.8 ? z1 : 1 - z1;
      const int z2 = static_cast<int>(rng.next_below(2));
      p2[i] = z2;
      q2[i] = rng.next_double() < 0.6 ? z2 : 1 - z2;
      pp[i] = p1[i] * 2 + p2[i];
      qq[i] = q1[i] * 2 + q2[i];
    }
    const double sum = mutual_information(p1, q1) + mutual_information(p2, q2);
    const double product = mutual_information(pp, qq);
    const double bias = plugin_bias_bound(4, 4, n);
    CHECK(std::abs(product - sum) <= 10.0 * bias + 1e-3);
  }

  SUBCASE("conditioning on a subset costs at most log 2") {
    for (int t = 0; t < 50; ++t) {
      RngStream rng(37, "mi4", static_cast<std::uint64_t>(t));
      const std::size_t cells = 24;
      auto joint = random_distribution(rng, cells);
      std::vector<int> pa(cells), qa(cells), ra(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        pa[c] = static_cast<int>(c % 2);
        qa[c] = static_cast<int>((c / 2) % 3);
        ra[c] = static_cast<int>(c / 6);
      }
      // Subset A: a union of cells with positive mass.
      std::vector<char> in_a(cells, 0);
      double a_mass = 0.0;
      for (std::size_t c = 0; c < cells; ++c)
        if (rng.next_double() < 0.5) {
          in_a[c] = 1;
          a_mass += joint[c];
        }
      if (a_mass <= 0.0) continue;
      std::vector<double> conditional(cells, 0.0);
      for (std::size_t c = 0; c < cells; ++c)
        if (in_a[c]) conditional[c] = joint[c] / a_mass;
      const double lhs =
          a_mass * conditional_mutual_information(pa, qa, ra, &conditional);
      const double rhs =
          std::log(2.0) + conditional_mutual_information(pa, qa, ra, &joint);
      CHECK(lhs <= rhs + 1e-9);
    }
  }

  SUBCASE("chain rule over coordinate slices") {
    for (int t = 0; t < 20; ++t) {
      RngStream rng(38, "mi5", static_cast<std::uint64_t>(t));
      // Joint over (X1, X2, Q) with 2*2*3 outcomes.
      const std::size_t cells = 12;
      auto joint = random_distribution(rng, cells);
      std::vector<int> x1(cells), x2(cells), both(cells), q(cells);
      for (std::size_t c = 0; c < cells; ++c) {
        x1[c] = static_cast<int>(c % 2);
        x2[c] = static_cast<int>((c / 2) % 2);
        both[c] = x1[c] * 2 + x2[c];
        q[c] = static_cast<int>(c / 4);
      }
      const double joint_info = mutual_information(both, q, &joint);
      const double chain =
          mutual_information(x1, q, &joint) +
          conditional_mutual_information(x2, q, x1, &joint);
      CHECK(joint_info == doctest::Approx(chain).epsilon(1e-9));
    }
  }
}

TEST_CASE("typical sets") {
  SUBCASE("fair coin names are all typical") {
    const int N = 10;
    std::vector<double> exact(1u << N, 1.0 / static_cast<double>(1u << N));
    const auto typical = typical_set(exact, N, 0.01, std::log(2.0));
    CHECK(typical.size() == exact.size());
  }

  SUBCASE("biased-coin typical mass grows with N") {
    const double p = 0.75;
    const double h = -(p * std::log(p) + (1 - p) * std::log(1 - p));
    auto mass_at = [&](int N) {
      // Exact: group names by the number of heads.
      double mass = 0.0;
      double log_choose = 0.0;  // log C(N, 0)
      for (int k = 0; k <= N; ++k) {
        if (k > 0)
          log_choose += std::log(static_cast<double>(N - k + 1) /
                                 static_cast<double>(k));
        const double log_prob =
            k * std::log(p) + (N - k) * std::log(1 - p);
        const double eps = 0.15;
        if (log_prob > -(h + eps) * N && log_prob < -(h - eps) * N)
          mass += std::exp(log_choose + log_prob);
      }
      return mass;
    };
    double prev = 0.0;
    for (const int N : {10, 20, 40, 80}) {
      const double mass = mass_at(N);
      CHECK(mass >= prev - 1e-9);
      prev = mass;
    }
    CHECK(prev > 0.9);
  }

  SUBCASE("size bound") {
    RngStream rng(39, "typ", 0);
    const int N = 12;
    const double h = std::log(2.0), eps = 0.1;
    auto probs = random_distribution(rng, 1u << N);
    const auto typical = typical_set(probs, N, eps, h);
    CHECK(static_cast<double>(typical.size()) <= std::exp((h + eps) * N));
  }
}

TEST_CASE("block entropy rates") {
  SUBCASE("iid uniform per-step entropy") {
    const MarkovSystem coin = iid_uniform_system(2);
    const auto rows = block_entropy_rate(coin, {1, 2}, 200000, 40);
    CHECK(rows[0].per_step == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK(rows[1].per_step == doctest::Approx(std::log(2.0)).epsilon(1e-3));
    CHECK_FALSE(rows[0].undersampled);
  }

  SUBCASE("markov chain approaches the closed form from above") {
    const MarkovSystem chain = build_markov_system({{0.9, 0.1}, {0.2, 0.8}});
    const double rate = markov_entropy_rate(chain);
    CHECK(rate == doctest::Approx(0.3835227).epsilon(1e-5));
    const auto rows = block_entropy_rate(chain, {2, 4, 8, 12}, 400000, 41);
    double prev = 1e9;
    for (const auto& row : rows) {
      CHECK(row.per_step > rate - 1e-3);
      CHECK(row.per_step <= prev + 1e-6);
      prev = row.per_step;
    }
    CHECK(rows.back().per_step == doctest::Approx(0.4046).epsilon(0.02));
  }

  SUBCASE("undersampling warning fires") {
    const MarkovSystem coin = iid_uniform_system(2);
    const auto rows = block_entropy_rate(coin, {12}, 1000, 42);
    CHECK(rows[0].undersampled);
  }
}

TEST_CASE("spatial entropy rates") {
  SUBCASE("constant process has rate zero") {
    SampledSpace space;
    space.weights.assign(50, 0.02);
    space.dist = DistanceMatrix(50, 0.0);
    CHECK(spatial_entropy_rate(space, 16, 0.05, 0.01) == doctest::Approx(0.0));
  }

  SUBCASE("rate nonincreasing in r") {
    RngStream rng(43, "spatial", 0);
    const int N = 10;
    const std::size_t m = 600;
    SampledSpace space;
    space.weights.assign(m, 1.0 / static_cast<double>(m));
    space.dist = DistanceMatrix(m);
    std::vector<std::vector<char>> names(m, std::vector<char>(N));
    for (auto& name : names)
      for (auto& c : name) c = static_cast<char>(rng.next_below(2));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        int h = 0;
        for (int b = 0; b < N; ++b)
          if (names[i][static_cast<std::size_t>(b)] !=
              names[j][static_cast<std::size_t>(b)])
            ++h;
        space.dist(i, j) = h;
        space.dist(j, i) = h;
      }
    double prev = 1e9;
    for (double r : {0.02, 0.1, 0.25, 0.4}) {
      const double rate = spatial_entropy_rate(space, N, r, 0.02);
      CHECK(rate <= prev + 1e-9);
      prev = rate;
    }
  }
}

TEST_CASE("greedy support cover") {
  SUBCASE("single full-support component") {
    const std::vector<double> mu = {0.25, 0.25, 0.25, 0.25};
    MeasureComponent comp;
    comp.measure = mu;
    comp.support = {0, 1, 2, 3};
    const auto outcome = greedy_support_cover({comp}, mu, 0.8, 1.0, 0.1);
    CHECK(outcome.selected.size() == 1);
    CHECK(outcome.covered_mass == doctest::Approx(1.0));
  }

  SUBCASE("validation failures are reported") {
    const std::vector<double> mu = {0.5, 0.5};
    MeasureComponent comp;
    comp.measure = {0.5, 0.5};
    comp.support = {0, 1};
    CHECK_THROWS(greedy_support_cover({comp, comp}, mu, 0.5, 2.0, 0.1));
    // Component density 2 with M = 1.1 and eps = 0 must be rejected.
    MeasureComponent heavy, light;
    heavy.measure = {0.5, 0.0};
    heavy.support = {0};
    light.measure = {0.0, 0.5};
    light.support = {1};
    CHECK_THROWS(greedy_support_cover({heavy, light}, mu, 0.5, 1.1, 0.0));
  }
}

TEST_CASE("trim to a partition") {
  SUBCASE("a full cell survives for any alpha") {
    const std::vector<double> w = {0.25, 0.25, 0.25, 0.25};
    const std::vector<int> partition = {0, 0, 1, 1};
    const std::vector<char> U = {1, 1, 0, 0};  // exactly cell 0
    for (double alpha : {0.6, 0.75, 0.9}) {
      const TrimResult trim = trim_locally_thick(w, U, partition, alpha);
      CHECK(trim.V == U);
    }
  }

  SUBCASE("single-cell partition keeps U") {
    const std::vector<double> w = {0.2, 0.3, 0.5};
    const std::vector<int> partition = {7, 7, 7};
    const std::vector<char> U = {1, 0, 1};
    const TrimResult trim = trim_locally_thick(w, U, partition, 0.8);
    CHECK(trim.V == U);
  }
}

TEST_CASE("efficient cover") {
  SUBCASE("independent partitions give small covers") {
    RngStream rng(44, "eff", 0);
    const std::size_t m = 400;
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<int> s_labels(m), t_labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      s_labels[i] = static_cast<int>(rng.next_below(4));
      t_labels[i] = static_cast<int>(rng.next_below(4));
    }
    std::vector<char> U(m, 0);
    for (std::size_t i = 0; i < m / 2 + 40; ++i) U[i] = 1;
    const EfficientCoverResult result =
        efficient_cover(w, s_labels, t_labels, U, 0.5, 0.2);
    CHECK(result.coverage_ok);
    CHECK(static_cast<double>(result.points.size()) <=
          std::max(result.size_bound, 1.0));
  }

  SUBCASE("perfectly correlated partitions still meet the guarantee") {
    RngStream rng(45, "eff2", 0);
    const std::size_t m = 300;
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<int> labels(m);
    for (auto& v : labels) v = static_cast<int>(rng.next_below(8));
    std::vector<char> U(m, 0);
    for (std::size_t i = 0; i < 200; ++i) U[i] = 1;
    const EfficientCoverResult result =
        efficient_cover(w, labels, labels, U, 0.5, 0.2);
    CHECK(result.coverage_ok);
  }

  SUBCASE("degenerate constants are rejected") {
    const std::vector<double> w = {0.5, 0.5};
    const std::vector<int> labels = {0, 1};
    const std::vector<char> U = {1, 1};
    CHECK_THROWS(efficient_cover(w, labels, labels, U, 0.2, 0.3));
  }
}
