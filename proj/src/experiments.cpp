#include "rwrslab/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rwrslab/bicov.hpp"
#include "rwrslab/brownlab.hpp"
#include "rwrslab/cantorlab.hpp"
#include "rwrslab/infotools.hpp"
#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

constexpr std::uint64_t kAcceptSeed = 20260801;

// ---------------------------------------------------------------------------
// Small shared helpers
// ---------------------------------------------------------------------------

SampledPairSpace random_pair_space(RngStream& rng, std::size_t m) {
  SampledPairSpace space;
  space.weights.assign(m, 1.0 / static_cast<double>(m));
  if (rng.next_double() < 0.5) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      space.weights[i] = 0.05 + rng.next_double();
      total += space.weights[i];
    }
    for (double& w : space.weights) w /= total;
  }
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

// Independent brute-force a-partial delta-bi-covering enumerator (plain
// loops, no reuse of the library's neighbourhood code).
std::size_t brute_force_bicov(const SampledPairSpace& space, double a,
                              double delta) {
  const std::size_t m = space.size();
  for (std::size_t k = 1; k <= m; ++k) {
    std::vector<std::size_t> pick(k, 0);
    std::function<bool(std::size_t, std::size_t)> rec =
        [&](std::size_t slot, std::size_t start) {
          if (slot == k) {
            std::vector<char> mid(m, 0), hood(m, 0);
            for (std::size_t s = 0; s < k; ++s)
              for (std::size_t x = 0; x < m; ++x)
                if (space.dist1(pick[s], x) < delta) mid[x] = 1;
            for (std::size_t x = 0; x < m; ++x)
              if (mid[x])
                for (std::size_t y = 0; y < m; ++y)
                  if (space.dist2(x, y) < delta) hood[y] = 1;
            double mass = 0.0;
            for (std::size_t y = 0; y < m; ++y)
              if (hood[y]) mass += space.weights[y];
            return mass > a;
          }
          for (std::size_t c = start; c < m; ++c) {
            pick[slot] = c;
            if (rec(slot + 1, c + 1)) return true;
          }
          return false;
        };
    if (rec(0, 0)) return k;
  }
  return m + 1;
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct CheckLog {
  bool pass = true;
  std::ostringstream detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

// ---------------------------------------------------------------------------
// Acceptance criteria
// ---------------------------------------------------------------------------

AcceptanceOutcome criterion_1(int) {
  CheckLog log;
  const double greedy_ratio = std::log(12.0) + 1.0;
  for (int t = 0; t < 200; ++t) {
    RngStream rng(kAcceptSeed, "accept1", static_cast<std::uint64_t>(t));
    const std::size_t m = 5 + static_cast<std::size_t>(t % 8);
    SampledPairSpace space = random_pair_space(rng, m);
    const double a = 0.3 + 0.5 * rng.next_double();
    const double delta = 0.15 + 0.6 * rng.next_double();
    const std::size_t oracle = brute_force_bicov(space, a, delta);
    const CoverResult exact = bicov_partial(space, a, delta, true);
    const CoverResult greedy = bicov_partial(space, a, delta, false);
    log.expect(exact.count == oracle,
               "exact!=oracle @" + std::to_string(t));
    log.expect(greedy.count >= exact.count,
               "greedy<exact @" + std::to_string(t));
    log.expect(static_cast<double>(greedy.count) <=
                   static_cast<double>(exact.count) * greedy_ratio,
               "greedy ratio @" + std::to_string(t));
    if (!log.pass) break;
  }
  return {1, "exact oracle equivalence (bi-covering core)", log.pass,
          log.detail.str()};
}

SampledPairSpace wedge_space(int per_axis) {
  const double step = 1.0 / static_cast<double>(per_axis - 1);
  std::vector<std::array<double, 3>> points;
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j)
      for (int k = 0; k < per_axis; ++k)
        points.push_back({i * step, j * step, k * step});
  const std::size_t m = points.size();
  SampledPairSpace space;
  space.weights.assign(m, 1.0 / static_cast<double>(m));
  space.dist1 = DistanceMatrix(m);
  space.dist2 = DistanceMatrix(m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      space.dist1(a, b) = std::abs(points[a][0] - points[b][0]) +
                          std::abs(points[a][1] - points[b][1]);
      space.dist2(a, b) = std::abs(points[a][1] - points[b][1]) +
                          std::abs(points[a][2] - points[b][2]);
    }
  space.metadata["model"] = "wedge";
  return space;
}

AcceptanceOutcome criterion_2(int) {
  CheckLog log;
  const int per_axis = 9;
  const SampledPairSpace space = wedge_space(per_axis);
  const std::size_t m = space.size();
  auto x2_of = [&](std::size_t idx) {
    const std::size_t j = (idx / static_cast<std::size_t>(per_axis)) %
                          static_cast<std::size_t>(per_axis);
    return static_cast<double>(j) / static_cast<double>(per_axis - 1);
  };
  for (const double delta : {0.05, 0.1, 0.2}) {
    std::vector<std::vector<char>> hoods(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<char> seed(m, 0);
      seed[i] = 1;
      hoods[i] = bi_neighbourhood_mask(space, seed, delta);
    }
    bool hood_equal = true, sep_equal = true;
    for (std::size_t i = 0; i < m && (hood_equal || sep_equal); ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const double gap = std::abs(x2_of(i) - x2_of(j));
        if ((gap < 2.0 * delta) != static_cast<bool>(hoods[i][j]))
          hood_equal = false;
      }
      for (std::size_t j = i + 1; j < m; ++j) {
        bool disjoint = true;
        for (std::size_t x = 0; x < m; ++x)
          if (hoods[i][x] && hoods[j][x]) {
            disjoint = false;
            break;
          }
        const double gap = std::abs(x2_of(i) - x2_of(j));
        if (disjoint != (gap >= 4.0 * delta)) sep_equal = false;
      }
    }
    log.expect(hood_equal, "bi-neighbourhood != {|dx2|<2d} at delta=" +
                               std::to_string(delta));
    log.expect(sep_equal,
               "bi-separation != {|dx2|>=4d} at delta=" + std::to_string(delta));
  }

  // Example "simple-again": diagonal line U versus full plane V.
  for (const double delta : {0.05, 0.1, 0.2}) {
    const double spacing = delta / 2.0;
    const int n = static_cast<int>(std::floor(1.0 / spacing)) + 1;
    SampledPairSpace line;
    line.weights.assign(static_cast<std::size_t>(n),
                        1.0 / static_cast<double>(n));
    line.dist1 = DistanceMatrix(static_cast<std::size_t>(n));
    line.dist2 = DistanceMatrix(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double d = std::abs(i - j) * spacing;
        line.dist1(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = d;
        line.dist2(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = d;
      }
    const double full = 1.0 - 0.5 / static_cast<double>(n);
    const CoverResult cover = bicov_partial(line, full, delta, false);
    const double predicted = std::ceil(1.0 / (2.0 * delta));
    log.expect(std::abs(static_cast<double>(cover.count) - predicted) <= 1.0,
               "line bicov " + std::to_string(cover.count) + " vs " +
                   std::to_string(predicted) + " at delta=" +
                   std::to_string(delta));

    const int g = 11;
    SampledPairSpace plane;
    plane.weights.assign(static_cast<std::size_t>(g * g),
                         1.0 / static_cast<double>(g * g));
    plane.dist1 = DistanceMatrix(static_cast<std::size_t>(g * g));
    plane.dist2 = DistanceMatrix(static_cast<std::size_t>(g * g));
    for (int a = 0; a < g * g; ++a)
      for (int b = 0; b < g * g; ++b) {
        const double xa = (a / g) / static_cast<double>(g - 1);
        const double za = (a % g) / static_cast<double>(g - 1);
        const double xb = (b / g) / static_cast<double>(g - 1);
        const double zb = (b % g) / static_cast<double>(g - 1);
        // Wedge metrics restricted to the plane x2 = 0.
        plane.dist1(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
            std::abs(xa - xb);
        plane.dist2(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
            std::abs(za - zb);
      }
    const double full_plane = 1.0 - 0.5 / static_cast<double>(g * g);
    const CoverResult plane_cover = bicov_partial(plane, full_plane, delta, false);
    log.expect(plane_cover.count == 1,
               "plane bicov != 1 at delta=" + std::to_string(delta));
  }
  return {2, "wedge-space characterizations", log.pass, log.detail.str()};
}

AcceptanceOutcome criterion_3(int) {
  CheckLog log;
  // (a) greedy_support_cover guarantees on 200 random instances.
  for (int t = 0; t < 200 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept3a", static_cast<std::uint64_t>(t));
    const std::size_t m = 6 + static_cast<std::size_t>(t % 12);
    std::vector<double> mu(m, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mu[i] = 0.05 + rng.next_double();
      total += mu[i];
    }
    for (double& x : mu) x /= total;
    const std::size_t k = 2 + static_cast<std::size_t>(t % 5);
    std::vector<MeasureComponent> components(k);
    for (auto& comp : components) comp.measure.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> share(k, 0.0);
      double s = 0.0;
      for (std::size_t z = 0; z < k; ++z) {
        share[z] = rng.next_double() < 0.4 ? 0.0 : rng.next_double();
        s += share[z];
      }
      if (s == 0.0) {
        share[rng.next_below(k)] = 1.0;
        s = 1.0;
      }
      for (std::size_t z = 0; z < k; ++z)
        components[z].measure[i] = mu[i] * share[z] / s;
    }
    double density = 0.0;
    for (auto& comp : components) {
      const double cm = std::accumulate(comp.measure.begin(),
                                        comp.measure.end(), 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        if (comp.measure[i] > 0.0) comp.support.push_back(i);
        if (cm > 0.0) density = std::max(density, comp.measure[i] / cm / mu[i]);
      }
    }
    const double M = density * (0.7 + 0.6 * rng.next_double());
    double eps = 0.0;
    for (const auto& comp : components) {
      const double cm = std::accumulate(comp.measure.begin(),
                                        comp.measure.end(), 0.0);
      if (cm <= 0.0) continue;
      std::vector<double> normalized = comp.measure;
      for (double& x : normalized) x /= cm;
      eps = std::max(eps, approx_abs_continuity(normalized, mu, M, 0.0).excess);
    }
    eps += 0.01;
    const double alpha = (1.0 - eps) * (0.3 + 0.5 * rng.next_double());
    const GreedyCoverOutcome outcome =
        greedy_support_cover(components, mu, alpha, M, eps);
    log.expect(outcome.covered_mass > alpha, "gsc mass @" + std::to_string(t));
    log.expect(static_cast<double>(outcome.selected.size()) <=
                   M / (1.0 - alpha - eps) + 1e-9,
               "gsc size bound @" + std::to_string(t));
  }

  // (b) trim guarantees.
  for (int t = 0; t < 200 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept3b", static_cast<std::uint64_t>(t));
    const std::size_t m = 20 + static_cast<std::size_t>(t % 20);
    std::vector<double> w(m, 0.0);
    double total = 0.0;
    for (auto& x : w) {
      x = 0.05 + rng.next_double();
      total += x;
    }
    for (auto& x : w) x /= total;
    std::vector<int> partition(m, 0);
    for (auto& c : partition) c = static_cast<int>(rng.next_below(6));
    std::vector<char> U(m, 0);
    bool any = false;
    for (auto& u : U) {
      u = rng.next_double() < 0.4 ? 1 : 0;
      any = any || u;
    }
    if (!any) U[0] = 1;
    const double alpha = 0.51 + 0.44 * rng.next_double();
    const TrimResult trim = trim_locally_thick(w, U, partition, alpha);
    log.expect(trim.mass_v >= alpha * trim.mass_u - 1e-9,
               "trim mass @" + std::to_string(t));
    std::map<int, double> cell_mass, cell_v;
    for (std::size_t i = 0; i < m; ++i) {
      cell_mass[partition[i]] += w[i];
      if (trim.V[i]) cell_v[partition[i]] += w[i];
    }
    for (const auto& [cell, vm] : cell_v)
      log.expect(vm / cell_mass[cell] >= trim.thickness - 1e-9,
                 "trim thickness @" + std::to_string(t));
  }

  // (c) efficient_cover coverage guarantee on 100 random finite joints.
  for (int t = 0; t < 100 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept3c", static_cast<std::uint64_t>(t));
    const std::size_t m = 300;
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    const int latent_cells = 2 + t % 4;
    std::vector<int> s_labels(m), t_labels(m), r_labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      const int z = static_cast<int>(rng.next_below(
          static_cast<std::uint64_t>(latent_cells)));
      const int sa = rng.next_double() < 0.7
                         ? 0
                         : static_cast<int>(rng.next_below(3));
      const int tb = rng.next_double() < 0.7
                         ? 0
                         : static_cast<int>(rng.next_below(3));
      s_labels[i] = z * 10 + sa;
      t_labels[i] = z * 10 + tb;
      r_labels[i] = z;
    }
    std::vector<char> U(m, 0);
    double mass = 0.0;
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    for (std::size_t i : order) {
      U[i] = 1;
      mass += w[i];
      if (mass >= 0.55) break;
    }
    const double alpha = 0.5, eta = 0.2;
    const std::vector<int>* rel = (t % 4 == 0) ? &r_labels : nullptr;
    const EfficientCoverResult result =
        efficient_cover(w, s_labels, t_labels, U, alpha, eta, rel);
    log.expect(result.coverage_ok, "efficient_cover coverage @" +
                                       std::to_string(t) + " cov=" +
                                       std::to_string(result.coverage) +
                                       " target=" +
                                       std::to_string(result.target));
    for (std::size_t p : result.points)
      log.expect(U[p] != 0, "efficient_cover S* escaped U");
  }
  return {3, "section-5 lemma postconditions", log.pass, log.detail.str()};
}

AcceptanceOutcome criterion_4(int workers) {
  CheckLog log;
  const ProcessModel process = srw_process(1);
  CompetitionConfig config;
  config.alpha = 2.0;
  config.kappa = 0.5;
  config.kappa_prime = 0.25;
  int ones = 0, runs = 0;
  std::ostringstream values;
  for (int seed = 1; seed <= 20; ++seed) {
    for (const int N : {32, 64, 128}) {
      const std::vector<RwrsSample> samples = sample_rwrs_batch(
          process, N, 2000, kAcceptSeed + static_cast<std::uint64_t>(seed));
      const SampledPairSpace space =
          pair_space_from_samples(samples, process, N, workers);
      CompetitionConfig local = config;
      local.delta = 0.1 * static_cast<double>(N);
      local.seed = kAcceptSeed + static_cast<std::uint64_t>(seed);
      const BicovProfileResult result =
          estimate_bicov_profile(space, local, &samples, &process);
      ++runs;
      if (result.value == 1) ++ones;
      if (seed <= 2) values << " " << result.value;
    }
  }
  const double share = static_cast<double>(ones) / static_cast<double>(runs);
  log.expect(share >= 0.95, "share of value-1 runs = " + std::to_string(share) +
                                "; sample values:" + values.str());
  return {4, "Bernoulli triviality of the BICOV profile", log.pass,
          log.detail.str()};
}

namespace rotation {

SampledPairSpace space_at(int K, int N) {
  SampledPairSpace space;
  const std::size_t m = static_cast<std::size_t>(K);
  space.weights.assign(m, 1.0 / static_cast<double>(K));
  space.dist1 = DistanceMatrix(m);
  space.dist2 = DistanceMatrix(m);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      const int gap = std::min((i - j + K) % K, (j - i + K) % K);
      const double d = static_cast<double>(gap) / static_cast<double>(K);
      space.dist1(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          static_cast<double>(N) * d;
      space.dist2(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          static_cast<double>(N) * d;
    }
  return space;
}

// Exact min-max cov profile (single metric): min over conditionals mu|_A of
// max over subsets U with mu'(U) >= kappa of the exact kappa'-partial
// r-covering number of the subspace (U, d).
std::size_t exact_cov_profile(const SampledPairSpace& space, double alpha,
                              double kappa, double kappa_prime, double r) {
  const std::size_t m = space.size();
  const std::uint32_t full = (1u << m) - 1;
  auto mask_mass = [&](std::uint32_t mask, const std::vector<double>& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) total += w[i];
    return total;
  };
  std::vector<std::uint32_t> ball(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (space.dist1(i, j) < r) ball[i] |= (1u << j);

  std::size_t best = m + 1;
  for (std::uint32_t a_mask = 1; a_mask <= full; ++a_mask) {
    const double a_mass = mask_mass(a_mask, space.weights);
    if (a_mass + 1e-12 < 1.0 / alpha) continue;
    std::vector<double> miner(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (a_mask & (1u << i)) miner[i] = space.weights[i] / a_mass;
    std::size_t inner_max = 0;
    bool dominated = false;
    for (std::uint32_t u_mask = 1; u_mask <= full && !dominated; ++u_mask) {
      if (mask_mass(u_mask, miner) < kappa - 1e-12) continue;
      std::vector<std::size_t> points;
      for (std::size_t i = 0; i < m; ++i)
        if (u_mask & (1u << i)) points.push_back(i);
      std::size_t inner = points.size();
      bool found = false;
      for (std::size_t k = 1; k <= points.size() && !found; ++k) {
        std::vector<std::size_t> idx(k, 0);
        std::function<bool(std::size_t, std::size_t, std::uint32_t)> rec =
            [&](std::size_t slot, std::size_t start, std::uint32_t covered) {
              if (mask_mass(covered & u_mask, miner) > kappa_prime) return true;
              if (slot == k) return false;
              for (std::size_t c = start; c < points.size(); ++c) {
                if (rec(slot + 1, c + 1, covered | ball[points[c]]))
                  return true;
              }
              return false;
            };
        if (rec(0, 0, 0)) {
          inner = k;
          found = true;
        }
      }
      if (inner > inner_max) {
        inner_max = inner;
        if (inner_max >= best) dominated = true;
      }
    }
    if (!dominated && inner_max > 0) best = std::min(best, inner_max);
  }
  return best;
}

}  // namespace rotation

AcceptanceOutcome criterion_5(int) {
  CheckLog log;
  const int K = 10;
  const double delta = 0.12;
  CompetitionConfig config;
  config.alpha = 2.0;
  config.kappa = 0.5;
  config.kappa_prime = 0.25;
  std::size_t first_value = 0;
  for (const int N : {16, 32, 64, 128, 256}) {
    const SampledPairSpace space = rotation::space_at(K, N);
    CompetitionConfig local = config;
    local.delta = delta * static_cast<double>(N);
    const BicovProfileResult bicov = exact_bicov_profile(space, local);
    const std::size_t cov_fine = rotation::exact_cov_profile(
        space, config.alpha, config.kappa, config.kappa_prime,
        delta * static_cast<double>(N));
    const std::size_t cov_coarse = rotation::exact_cov_profile(
        space, config.alpha, config.kappa, config.kappa_prime,
        2.0 * delta * static_cast<double>(N));
    log.expect(cov_coarse <= bicov.value && bicov.value <= cov_fine,
               "sandwich broken at N=" + std::to_string(N) + " (" +
                   std::to_string(cov_coarse) + "," +
                   std::to_string(bicov.value) + "," +
                   std::to_string(cov_fine) + ")");
    if (first_value == 0)
      first_value = bicov.value;
    else
      log.expect(bicov.value == first_value,
                 "bicov not constant at N=" + std::to_string(N));
    log.expect(bicov.verify(space, local), "witness verification failed");
  }
  return {5, "isometric rotation boundedness", log.pass, log.detail.str()};
}

AcceptanceOutcome criterion_6(int workers) {
  CheckLog log;
  CompetitionConfig config;
  config.alpha = 2.0;
  config.kappa = 0.5;
  config.kappa_prime = 0.25;
  config.delta = 0.1;
  const std::vector<int> n_list = {64, 128, 256, 512, 1024};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(kAcceptSeed + s);
  std::map<int, RateCurve> curves;
  for (const int alphabet : {2, 4}) {
    const ProcessModel process = srw_process(static_cast<std::size_t>(alphabet));
    curves[alphabet] = rate_curve(process, n_list, config, 2000, seeds, workers);
  }
  const RateCurve& c2 = curves[2];
  const RateCurve& c4 = curves[4];
  log.expect(c2.slope_ci_lo > 0.0,
             "h=log2 slope not positive (ci_lo=" +
                 std::to_string(c2.slope_ci_lo) + ")");
  log.expect(c4.slope_ci_lo > 0.0,
             "h=log4 slope not positive (ci_lo=" +
                 std::to_string(c4.slope_ci_lo) + ")");
  const double ratio = c4.slope / std::max(c2.slope, 1e-12);
  log.expect(ratio >= 1.4 && ratio <= 2.6,
             "slope ratio " + std::to_string(ratio) + " outside [1.4,2.6]");
  std::ostringstream detail;
  detail << "slope2=" << c2.slope << " slope4=" << c4.slope
         << " ratio=" << ratio;
  if (!log.pass) detail << "; " << log.detail.str();
  return {6, "RWRS growth and entropy monotonicity", log.pass, detail.str()};
}

AcceptanceOutcome criterion_7(int) {
  CheckLog log;
  const QuantileEstimate at_one = psi_bm_quantile(1.0, 2048, 10, kAcceptSeed);
  log.expect(std::isinf(at_one.value), "alpha=1 did not yield infinity");
  const std::vector<double> alphas = {1.25, 1.5, 2.0, 4.0, 8.0};
  std::vector<QuantileEstimate> estimates;
  for (double alpha : alphas)
    estimates.push_back(psi_bm_quantile(alpha, 2048, 100000, kAcceptSeed));
  std::ostringstream detail;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    detail << " psi(" << alphas[i] << ")=" << estimates[i].value;
    log.expect(std::isfinite(estimates[i].value) && estimates[i].value > 0.0,
               "psi not finite at alpha=" + std::to_string(alphas[i]));
    if (i > 0)
      log.expect(estimates[i].ci_hi < estimates[i - 1].ci_lo,
                 "CIs overlap between alpha=" + std::to_string(alphas[i - 1]) +
                     " and " + std::to_string(alphas[i]));
  }
  return {7, "psi_BM quantile properties", log.pass,
          log.pass ? detail.str() : log.detail.str() + ";" + detail.str()};
}

AcceptanceOutcome criterion_8(int) {
  CheckLog log;
  const double exact =
      berry_esseen_gap_of_law({-1.0, 1.0}, {0.5, 0.5});
  log.expect(std::abs(exact - 0.3413) <= 5e-4,
             "N=1 exact gap " + std::to_string(exact));
  const ProcessModel process = srw_process(1);
  std::vector<double> log_n, log_gap;
  std::ostringstream detail;
  for (int N = 16; N <= 4096; N *= 2) {
    const double gap = berry_esseen_gap(process, N, 100000, kAcceptSeed);
    log_n.push_back(std::log(static_cast<double>(N)));
    log_gap.push_back(std::log(gap));
    detail << " gap(" << N << ")=" << gap;
  }
  const double slope = ols_slope(log_n, log_gap);
  detail << " slope=" << slope;
  log.expect(slope >= -0.6 && slope <= -0.4,
             "log-log slope " + std::to_string(slope));
  return {8, "Berry-Esseen scaling", log.pass,
          log.pass ? detail.str() : log.detail.str() + ";" + detail.str()};
}

AcceptanceOutcome criterion_9(int) {
  CheckLog log;
  const ProcessModel process = srw_process(1);
  std::map<int, std::vector<FunctionalGap>> gaps;
  for (const int N : {64, 256, 1024})
    gaps[N] = invariance_gap(process, N, 100000, kAcceptSeed,
                             N == 1024 ? 1000000 : 400000);
  std::ostringstream detail;
  for (std::size_t f = 0; f < 3; ++f) {
    const double g64 = gaps[64][f].ks;
    const double g256 = gaps[256][f].ks;
    const double g1024 = gaps[1024][f].ks;
    detail << " " << gaps[64][f].functional << ":" << g64 << ">" << g256 << ">"
           << g1024;
    log.expect(g64 >= g256 && g256 >= g1024,
               gaps[64][f].functional + " gaps not decreasing");
    log.expect(g1024 < 0.02, gaps[64][f].functional + " gap at 1024 = " +
                                 std::to_string(g1024));
  }
  // Coboundary cocycle sigma = f(S y) - f(y) for the 1-block f = 1_{symbol=1}.
  ProcessModel coboundary = srw_process(1);
  coboundary.cocycle.range = 2;
  coboundary.cocycle.table = {0.0, 1.0, -1.0, 0.0};
  const VarianceEstimate var =
      effective_variance(coboundary, 1024, 20000, kAcceptSeed);
  log.expect(var.value < 0.01,
             "coboundary variance " + std::to_string(var.value));
  const std::vector<FunctionalGap> flagged =
      invariance_gap(coboundary, 1024, 2000, kAcceptSeed, 2000);
  log.expect(flagged[0].degenerate, "coboundary not flagged degenerate");
  return {9, "invariance principle gaps", log.pass,
          log.pass ? detail.str() : log.detail.str() + ";" + detail.str()};
}

// Brute-force meandering oracle: enumerate subfamilies, exact set distance.
bool brute_force_meandering(const std::vector<double>& sigma, int M,
                            double alpha, double ell) {
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
            dist = std::min(dist,
                            std::abs(sigma[static_cast<std::size_t>(i * M + a)] -
                                     sigma[static_cast<std::size_t>(j * M + b)]));
        if (dist > 2.0 * ell) has_far_pair = true;
      }
    }
    if (!has_far_pair) return false;
  }
  return true;
}

AcceptanceOutcome criterion_10(int) {
  CheckLog log;
  // Exact equivalence with the brute-force subfamily quantifier.
  for (int t = 0; t < 500 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept10", static_cast<std::uint64_t>(t));
    const int L = 2 + static_cast<int>(rng.next_below(11));  // 2..12
    const int M = 1 + static_cast<int>(rng.next_below(3));
    const double ell = 0.5 + rng.next_double();
    std::vector<double> sigma(static_cast<std::size_t>(L * M), 0.0);
    double value = 0.0;
    for (auto& s : sigma) {
      s = value;
      value += (2.0 * rng.next_double() - 1.0) * ell;  // increments <= ell
    }
    const double alpha = 0.15 + rng.next_double();
    const bool fast = is_meandering(sigma, M, alpha, ell);
    const bool slow = brute_force_meandering(sigma, M, alpha, ell);
    log.expect(fast == slow, "disagreement @" + std::to_string(t));
  }

  // SRW trend and the fitted constant across an (L, alpha) grid.
  const ProcessModel process = srw_process(1);
  const int M = 16;
  const double ell = 1.0;
  const std::vector<int> l_grid = {8, 16, 32, 64, 128, 256, 512};
  const std::vector<double> alpha_grid = {0.25, 0.5, 0.75};
  std::map<std::pair<int, double>, MeanderFrequency> freq;
  for (int L : l_grid)
    for (double alpha : alpha_grid)
      freq[{L, alpha}] =
          meandering_frequency(process, M, L, alpha, ell, 1500, kAcceptSeed);
  std::ostringstream detail;
  for (std::size_t i = 0; i + 1 < l_grid.size(); ++i) {
    const MeanderFrequency& a = freq[{l_grid[i], 0.5}];
    const MeanderFrequency& b = freq[{l_grid[i + 1], 0.5}];
    const double slack = (a.ci_hi - a.ci_lo) / 2.0 + (b.ci_hi - b.ci_lo) / 2.0;
    log.expect(1.0 - b.value <= 1.0 - a.value + slack,
               "failure freq not nonincreasing at L=" +
                   std::to_string(l_grid[i + 1]));
  }
  double C = 0.0;
  for (const auto& [key, f] : freq)
    C = std::max(C, (1.0 - f.value) * std::cbrt(static_cast<double>(key.first)) *
                        key.second * key.second);
  detail << " fitted C=" << C;
  for (const auto& [key, f] : freq)
    log.expect(f.value >= 1.0 - C / (std::cbrt(static_cast<double>(key.first)) *
                                     key.second * key.second) -
                              1e-9,
               "fitted bound violated");
  return {10, "meandering detection and spade bound", log.pass,
          log.pass ? detail.str() : log.detail.str()};
}

AcceptanceOutcome criterion_11(int) {
  CheckLog log;
  for (int t = 0; t < 50 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept11", static_cast<std::uint64_t>(t));
    const int depth = 1 + t % 2;
    const long long len = 3 + static_cast<long long>(rng.next_below(10));
    std::vector<long long> D(static_cast<std::size_t>(depth), 0);
    long long prev = 1 + static_cast<long long>(rng.next_below(
                             static_cast<std::uint64_t>(len)));
    for (auto& d : D) {
      d = 1 + static_cast<long long>(
                  rng.next_below(static_cast<std::uint64_t>(prev)));
      prev = d;
    }
    std::sort(D.rbegin(), D.rend());
    const IntegerDcsCount enumeration =
        enumerate_dcs_integer(0, len, D, depth, false);
    // Product bound in the proof's 2L/2D normalization.
    double bound = 2.0 * static_cast<double>(len);
    double power = 1.0;
    for (std::size_t i = 0; i < D.size(); ++i) {
      bound *= std::pow(2.0 * static_cast<double>(D[i]), power);
      power = (i == 0) ? 2.0 : power * 2.0;
    }
    log.expect(static_cast<double>(enumeration.count) <= bound,
               "count " + std::to_string(enumeration.count) + " > bound " +
                   std::to_string(bound) + " @" + std::to_string(t));
  }

  // Triangle inequality for the structure metrics on random triples.
  for (int t = 0; t < 10000 && log.pass; ++t) {
    RngStream rng(kAcceptSeed, "accept11tri", static_cast<std::uint64_t>(t));
    const int depth = 1 + t % 3;
    const std::size_t leaves = std::size_t{1} << depth;
    auto random_matching = [&]() {
      DiscreteCantorMatching matching;
      matching.family.depth = depth;
      matching.offsets.depth = depth;
      for (std::size_t i = 0; i < leaves; ++i) {
        const double lo = 10.0 * rng.next_double();
        matching.family.intervals.emplace_back(lo, lo + rng.next_double());
        matching.offsets.values.push_back(4.0 * rng.next_double() - 2.0);
      }
      return matching;
    };
    const auto a = random_matching(), b = random_matching(), c = random_matching();
    log.expect(structure_distance(a, c) <=
                   structure_distance(a, b) + structure_distance(b, c) + 1e-9,
               "triangle inequality violated @" + std::to_string(t));
  }
  return {11, "discrete Cantor counting bound and metrics", log.pass,
          log.detail.str()};
}

AcceptanceOutcome criterion_12(int) {
  CheckLog log;
  const ScaleLadder ladder = make_ladder_explicit({8, 8, 8});
  const ProcessModel process = srw_process(2);
  const int r = 1, d = 3;
  const int N = static_cast<int>(ladder.N(d));
  GoodTimeParams gt;
  gt.r = r;
  gt.d = d;
  gt.ell = 1.0;
  gt.smooth_M = 8.0;
  gt.smooth_eps = 0.25;
  CoverParams cp;
  cp.r = r;
  cp.d = d;
  cp.ell = 1.0;
  cp.eta = 0.25;
  cp.smooth_M = gt.smooth_M;
  cp.smooth_eps = gt.smooth_eps;

  int family_successes = 0, cover_successes = 0;
  for (int t = 0; t < 100; ++t) {
    const RwrsSample sample = sample_rwrs(process, N, kAcceptSeed + 77,
                                          static_cast<std::uint64_t>(t));
    const GoodTimeSets sets = good_time_sets(sample, ladder, gt);
    std::vector<long long> good;
    for (std::size_t b = 0; b < sets.all.size(); ++b)
      if (sets.all[b]) good.push_back(static_cast<long long>(b));
    if (good.empty()) continue;

    const AdaptedFamilySearch search =
        find_adapted_family(good, sample, ladder, r, d, gt.ell);
    if (search.success) {
      ++family_successes;
      // Independent re-check of adaptedness and disjoint fattened images.
      const auto& family = search.family;
      const long long nr = static_cast<long long>(ladder.N(r));
      const std::size_t leaves = family.block_index.size();
      log.expect(leaves == (std::size_t{1} << (d - r)), "family size");
      for (std::size_t i = 0; i < leaves && log.pass; ++i)
        for (std::size_t j = i + 1; j < leaves; ++j) {
          double lo_i = 1e300, hi_i = -1e300, lo_j = 1e300, hi_j = -1e300;
          for (long long n = family.block_index[i] * nr;
               n < (family.block_index[i] + 1) * nr; ++n) {
            lo_i = std::min(lo_i, sample.sum(static_cast<int>(n)));
            hi_i = std::max(hi_i, sample.sum(static_cast<int>(n)));
          }
          for (long long n = family.block_index[j] * nr;
               n < (family.block_index[j] + 1) * nr; ++n) {
            lo_j = std::min(lo_j, sample.sum(static_cast<int>(n)));
            hi_j = std::max(hi_j, sample.sum(static_cast<int>(n)));
          }
          const double dist = std::max(lo_j - hi_i, lo_i - hi_j);
          log.expect(dist > 2.0 * gt.ell, "images not separated");
          // Adaptedness: divergence scale must match the index prefix.
          const std::size_t x = i ^ j;
          int h = (d - r) - 1;
          while (h >= 0 && !(x & (std::size_t{1} << h))) --h;
          const int prefix = (d - r) - 1 - h;
          const long long cell =
              static_cast<long long>(ladder.N(d - prefix - 1));
          log.expect((family.block_index[i] * nr) / cell !=
                         (family.block_index[j] * nr) / cell,
                     "indices do not diverge at the declared scale");
          const long long cell_up =
              static_cast<long long>(ladder.N(d - prefix));
          log.expect((family.block_index[i] * nr) / cell_up ==
                         (family.block_index[j] * nr) / cell_up,
                     "indices diverge too early");
        }
      log.expect(verify_adapted_family(family, sample, ladder, gt.ell),
                 "library verifier rejected family");
    }

    const FamilyCover cover = cover_with_families(sample, good, ladder, cp);
    if (cover.success) {
      ++cover_successes;
      log.expect(verify_family_cover(cover, sample, ladder, cp),
                 "cover verifier rejected @" + std::to_string(t));
      log.expect(cover.residual <= cp.eta * cover.range_length + 1e-9,
                 "cover residual bound @" + std::to_string(t));
    }

    // Identity-input matchings.
    if (t < 20) {
      MatchingParams mp;
      mp.r = r;
      mp.d = d;
      mp.ell = gt.ell;
      mp.eta = 0.25;
      mp.delta = 0.1;
      mp.smooth_M = gt.smooth_M;
      mp.smooth_eps = gt.smooth_eps;
      const MatchingExtraction identity =
          extract_matchings(sample, sample, process, ladder, mp);
      if (identity.success) {
        for (const auto& matching : identity.matchings)
          for (double u : matching.offsets.values)
            log.expect(u == 0.0, "identity offset nonzero");
        log.expect(identity.p1_ok && identity.p2_ok && identity.p3_ok,
                   "identity (P1)-(P3) failed @" + std::to_string(t));
      }
    }
  }
  log.expect(family_successes > 0, "no adapted family ever found");
  log.expect(cover_successes > 0, "no family cover ever succeeded");
  std::ostringstream detail;
  detail << "family successes=" << family_successes
         << " cover successes=" << cover_successes;
  if (!log.pass) detail << "; " << log.detail.str();
  return {12, "constructive searches verified", log.pass, detail.str()};
}

AcceptanceOutcome criterion_13(int) {
  CheckLog log;
  std::ostringstream detail;
  // (a) i.i.d. plug-in mutual information against the bias bound.
  const MarkovSystem coin = iid_uniform_system(2);
  for (const int N : {4, 8}) {
    const std::size_t samples = 100000;
    const std::vector<std::vector<int>> paths =
        sample_paths(coin, N, samples, kAcceptSeed + 5);
    std::vector<int> past(samples), future(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      int past_key = 0, future_key = 0;
      for (int t = 0; t < N; ++t) {
        past_key = past_key * 2 + paths[s][static_cast<std::size_t>(t)];
        future_key = future_key * 2 + paths[s][static_cast<std::size_t>(N + t)];
      }
      past[s] = past_key;
      future[s] = future_key;
    }
    const double info = mutual_information(past, future);
    const double bound = plugin_bias_bound(std::size_t{1} << N,
                                           std::size_t{1} << N, samples);
    detail << " I(" << N << ")=" << info << " bound=" << bound;
    log.expect(info <= bound, "iid plug-in MI exceeds bias bound at N=" +
                                  std::to_string(N));
  }

  // (b) 2-state Markov chain trend.
  const MarkovSystem chain = build_markov_system({{0.9, 0.1}, {0.2, 0.8}});
  const std::size_t samples = 1000000;
  std::vector<double> infos;
  std::vector<double> ses;
  for (const int N : {4, 6, 8, 10, 12}) {
    const std::vector<std::vector<int>> paths =
        sample_paths(chain, N, samples, kAcceptSeed + 6);
    std::vector<int> past(samples), future(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      int past_key = 0, future_key = 0;
      for (int t = 0; t < N; ++t) {
        past_key = past_key * 2 + paths[s][static_cast<std::size_t>(t)];
        future_key = future_key * 2 + paths[s][static_cast<std::size_t>(N + t)];
      }
      past[s] = past_key;
      future[s] = future_key;
    }
    const double info = mutual_information(past, future);
    infos.push_back(info);
    // Split-half spread as a cheap repetition error scale.
    std::vector<int> p1(past.begin(), past.begin() + samples / 2);
    std::vector<int> f1(future.begin(), future.begin() + samples / 2);
    std::vector<int> p2(past.begin() + samples / 2, past.end());
    std::vector<int> f2(future.begin() + samples / 2, future.end());
    const double half_gap =
        std::abs(mutual_information(p1, f1) - mutual_information(p2, f2));
    ses.push_back(std::max(half_gap, 1e-4));
    detail << " I_markov(" << N << ")=" << info;
  }
  for (std::size_t i = 0; i + 1 < infos.size(); ++i)
    log.expect(infos[i + 1] <= infos[i] + 2.0 * (ses[i] + ses[i + 1]),
               "markov MI trend increases at step " + std::to_string(i));
  for (double info : infos)
    log.expect(info <= 3.0 * infos.front(),
               "markov MI exceeds 3x its N=4 value");
  return {13, "Markov information bounds", log.pass,
          log.pass ? detail.str() : log.detail.str() + ";" + detail.str()};
}

AcceptanceOutcome criterion_14(int) {
  CheckLog log;
  std::ostringstream detail;
  // Spatial entropy of the fair-coin process with the discrete base metric,
  // estimated as the sup of the per-N rates over the table up to N = 64.
  const double r = 0.05, eps = 0.01;
  const std::size_t m = 4000;
  double best_rate = 0.0;
  for (const int N : {6, 8, 10, 12, 16, 24, 32, 48, 64}) {
    RngStream rng(kAcceptSeed, "accept14", static_cast<std::uint64_t>(N));
    // Distinct names with empirical weights; Hamming distances on names.
    std::map<std::vector<char>, double> names;
    for (std::size_t s = 0; s < m; ++s) {
      std::vector<char> name(static_cast<std::size_t>(N), 0);
      for (auto& c : name) c = static_cast<char>(rng.next_below(2));
      names[name] += 1.0 / static_cast<double>(m);
    }
    SampledSpace space;
    std::vector<std::vector<char>> keys;
    for (const auto& [name, weight] : names) {
      keys.push_back(name);
      space.weights.push_back(weight);
    }
    space.dist = DistanceMatrix(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
      for (std::size_t j = i + 1; j < keys.size(); ++j) {
        int hamming = 0;
        for (int t = 0; t < N; ++t)
          if (keys[i][static_cast<std::size_t>(t)] !=
              keys[j][static_cast<std::size_t>(t)])
            ++hamming;
        space.dist(i, j) = static_cast<double>(hamming);
        space.dist(j, i) = static_cast<double>(hamming);
      }
    const double rate = spatial_entropy_rate(space, N, r, eps);
    best_rate = std::max(best_rate, rate);
  }
  detail << "spatial rate=" << best_rate << " target=" << std::log(2.0);
  log.expect(std::abs(best_rate - std::log(2.0)) <= 0.15 * std::log(2.0),
             "spatial entropy off by more than 15%");

  // Markov block-entropy rate at N = 12 against the stated reference value.
  const MarkovSystem chain = build_markov_system({{0.9, 0.1}, {0.2, 0.8}});
  const std::vector<BlockEntropyRow> rows =
      block_entropy_rate(chain, {12}, 1000000, kAcceptSeed + 7);
  detail << " block rate(12)=" << rows[0].per_step;
  log.expect(std::abs(rows[0].per_step - 0.4101) <= 0.05 * 0.4101,
             "block entropy rate " + std::to_string(rows[0].per_step) +
                 " not within 5% of 0.4101");
  return {14, "entropy via covers", log.pass,
          log.pass ? detail.str() : log.detail.str() + ";" + detail.str()};
}

}  // namespace

std::vector<AcceptanceOutcome> run_acceptance(const std::vector<int>& subset,
                                              int workers, std::ostream& log) {
  using Criterion = AcceptanceOutcome (*)(int);
  const std::vector<Criterion> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
      criterion_11, criterion_12, criterion_13, criterion_14};
  if (workers <= 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  std::vector<AcceptanceOutcome> outcomes;
  for (int number = 1; number <= static_cast<int>(criteria.size()); ++number) {
    if (!subset.empty() &&
        std::find(subset.begin(), subset.end(), number) == subset.end())
      continue;
    const auto start = std::chrono::steady_clock::now();
    AcceptanceOutcome outcome = criteria[static_cast<std::size_t>(number - 1)](workers);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    log << (outcome.pass ? "[PASS] " : "[FAIL] ") << "criterion " << number
        << ": " << outcome.name;
    if (!outcome.detail.empty()) log << " (" << outcome.detail << ")";
    log << " [" << static_cast<int>(seconds) << "s]\n" << std::flush;
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

// ---------------------------------------------------------------------------
// Experiment catalog
// ---------------------------------------------------------------------------

ProcessModel process_from_json(const nlohmann::json& doc) {
  ProcessModel process = srw_process(2);
  if (doc.contains("base")) {
    process.base = build_markov_system(
        doc["base"]["transitions"].get<std::vector<std::vector<double>>>());
  }
  if (doc.contains("cocycle")) {
    process.cocycle.range = doc["cocycle"].value("range", 1);
    process.cocycle.table = doc["cocycle"]["table"].get<std::vector<double>>();
  }
  if (doc.contains("scenery")) {
    const auto& s = doc["scenery"];
    const std::string kind = s.value("kind", "iid");
    if (kind == "trivial") {
      process.scenery.alphabet = 1;
      process.scenery.probs = {1.0};
      process.scenery.kind = SceneryKind::kIid;
    } else if (kind == "markov") {
      process.scenery.kind = SceneryKind::kMarkov;
      process.scenery.transitions =
          s["transitions"].get<std::vector<std::vector<double>>>();
      process.scenery.alphabet = process.scenery.transitions.size();
    } else {
      process.scenery.kind = SceneryKind::kIid;
      process.scenery.probs = s["probs"].get<std::vector<double>>();
      process.scenery.alphabet = process.scenery.probs.size();
    }
    process.scenery.cell_width = s.value("cell_width", 1.0);
  }
  if (doc.contains("metric")) {
    process.metric.p = doc["metric"].value("p", 16);
    process.metric.rho = doc["metric"].value("rho", 0);
  }
  if (doc.contains("name")) process.name = doc["name"].get<std::string>();
  validate_cocycle(process.base, process.cocycle);
  return process;
}

namespace {

ReportRecord record(const std::string& experiment,
                    std::map<std::string, std::string> params,
                    const std::string& metric, double value,
                    double ci_lo = std::numeric_limits<double>::quiet_NaN(),
                    double ci_hi = std::numeric_limits<double>::quiet_NaN(),
                    const std::string& flags = "") {
  ReportRecord r;
  r.experiment = experiment;
  r.params = std::move(params);
  r.metric = metric;
  r.value = value;
  r.ci_lo = ci_lo;
  r.ci_hi = ci_hi;
  r.flags = flags;
  return r;
}

std::vector<ReportRecord> run_psi_bm(const ExperimentConfig& config) {
  const int n = config.params.value("n", 2048);
  const std::size_t count = config.params.value("count", std::size_t{20000});
  if (count > 5'000'000)
    throw std::invalid_argument("psi-bm: count budget exceeded (max 5e6)");
  std::vector<double> alphas =
      config.params.value("alphas", std::vector<double>{1.25, 1.5, 2.0, 4.0, 8.0});
  std::vector<ReportRecord> out;
  for (double alpha : alphas) {
    const QuantileEstimate q = psi_bm_quantile(alpha, n, count, config.seed);
    out.push_back(record("psi-bm",
                         {{"alpha", std::to_string(alpha)},
                          {"n", std::to_string(n)},
                          {"count", std::to_string(count)}},
                         "psi_bm", q.value, q.ci_lo, q.ci_hi,
                         std::isinf(q.value) ? "infinite" : ""));
  }
  return out;
}

std::vector<ReportRecord> run_bernoulli_triviality(const ExperimentConfig& config) {
  const std::size_t m = config.params.value("m", std::size_t{400});
  const int runs = config.params.value("runs", 3);
  std::vector<int> n_list = config.params.value("N", std::vector<int>{32, 64});
  if (m > 4000 || runs > 40)
    throw std::invalid_argument("bernoulli-triviality: budget exceeded");
  const ProcessModel process = srw_process(1);
  CompetitionConfig competition;
  competition.alpha = config.params.value("alpha", 2.0);
  competition.kappa = config.params.value("kappa", 0.5);
  competition.kappa_prime = config.params.value("kappa_prime", 0.25);
  std::vector<ReportRecord> out;
  for (int run = 0; run < runs; ++run)
    for (int N : n_list) {
      const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(run);
      const std::vector<RwrsSample> samples =
          sample_rwrs_batch(process, N, m, seed);
      const SampledPairSpace space =
          pair_space_from_samples(samples, process, N, config.workers);
      CompetitionConfig local = competition;
      local.delta = config.params.value("delta", 0.1) * static_cast<double>(N);
      local.seed = seed;
      const BicovProfileResult result =
          estimate_bicov_profile(space, local, &samples, &process);
      out.push_back(record("bernoulli-triviality",
                           {{"N", std::to_string(N)},
                            {"run", std::to_string(run)},
                            {"m", std::to_string(m)}},
                           "bicov_value", static_cast<double>(result.value)));
    }
  return out;
}

std::vector<ReportRecord> run_rotation_bicov(const ExperimentConfig& config) {
  const int K = config.params.value("K", 10);
  if (K > 12) throw std::invalid_argument("rotation-bicov: K capped at 12");
  const double delta = config.params.value("delta", 0.12);
  std::vector<int> n_list =
      config.params.value("N", std::vector<int>{16, 64, 256});
  CompetitionConfig competition;
  competition.alpha = config.params.value("alpha", 2.0);
  competition.kappa = config.params.value("kappa", 0.5);
  competition.kappa_prime = config.params.value("kappa_prime", 0.25);
  std::vector<ReportRecord> out;
  for (int N : n_list) {
    const SampledPairSpace space = rotation::space_at(K, N);
    CompetitionConfig local = competition;
    local.delta = delta * static_cast<double>(N);
    const BicovProfileResult result = exact_bicov_profile(space, local);
    out.push_back(record("rotation-bicov",
                         {{"N", std::to_string(N)}, {"K", std::to_string(K)}},
                         "bicov_exact", static_cast<double>(result.value)));
  }
  return out;
}

std::vector<ReportRecord> run_rwrs_rate(const ExperimentConfig& config) {
  const std::size_t m = config.params.value("m", std::size_t{500});
  if (m > 4000) throw std::invalid_argument("rwrs-rate: m budget exceeded");
  std::vector<int> n_list =
      config.params.value("N", std::vector<int>{64, 128, 256});
  const int seeds = config.params.value("seeds", 3);
  const std::size_t alphabet = config.params.value("alphabet", std::size_t{2});
  CompetitionConfig competition;
  competition.alpha = config.params.value("alpha", 2.0);
  competition.kappa = config.params.value("kappa", 0.5);
  competition.kappa_prime = config.params.value("kappa_prime", 0.25);
  competition.delta = config.params.value("delta", 0.1);
  const ProcessModel process = srw_process(alphabet);
  std::vector<std::uint64_t> seed_list;
  for (int s = 0; s < seeds; ++s)
    seed_list.push_back(config.seed + static_cast<std::uint64_t>(s));
  const RateCurve curve =
      rate_curve(process, n_list, competition, m, seed_list, config.workers);
  std::vector<ReportRecord> out;
  for (const auto& point : curve.points)
    out.push_back(record("rwrs-rate",
                         {{"N", std::to_string(point.N)},
                          {"alphabet", std::to_string(alphabet)}},
                         "log_bicov", point.mean_log_value, point.ci_lo,
                         point.ci_hi));
  out.push_back(record("rwrs-rate", {{"alphabet", std::to_string(alphabet)}},
                       "slope_vs_sqrtN", curve.slope, curve.slope_ci_lo,
                       curve.slope_ci_hi));
  return out;
}

std::vector<ReportRecord> run_meandering(const ExperimentConfig& config) {
  const int M = config.params.value("M", 16);
  const double alpha = config.params.value("alpha", 0.5);
  const double ell = config.params.value("ell", 1.0);
  const std::size_t samples = config.params.value("samples", std::size_t{500});
  if (samples > 100000) throw std::invalid_argument("meandering: budget");
  std::vector<int> l_list =
      config.params.value("L", std::vector<int>{8, 32, 128});
  const ProcessModel process = srw_process(1);
  std::vector<ReportRecord> out;
  for (int L : l_list) {
    const MeanderFrequency f =
        meandering_frequency(process, M, L, alpha, ell, samples, config.seed);
    out.push_back(record("meandering",
                         {{"L", std::to_string(L)},
                          {"M", std::to_string(M)},
                          {"alpha", std::to_string(alpha)}},
                         "meandering_frequency", f.value, f.ci_lo, f.ci_hi));
  }
  return out;
}

std::vector<ReportRecord> run_dcs_bounds(const ExperimentConfig& config) {
  const int cases = config.params.value("cases", 20);
  std::vector<ReportRecord> out;
  for (int t = 0; t < cases; ++t) {
    RngStream rng(config.seed, "dcs-bounds", static_cast<std::uint64_t>(t));
    const int depth = 1 + t % 2;
    const long long len = 3 + static_cast<long long>(rng.next_below(10));
    std::vector<long long> D(static_cast<std::size_t>(depth), 1);
    for (auto& d : D)
      d = 1 + static_cast<long long>(
                  rng.next_below(static_cast<std::uint64_t>(len)));
    std::sort(D.rbegin(), D.rend());
    const IntegerDcsCount count = enumerate_dcs_integer(0, len, D, depth);
    double bound = 2.0 * static_cast<double>(len);
    double power = 1.0;
    for (std::size_t i = 0; i < D.size(); ++i) {
      bound *= std::pow(2.0 * static_cast<double>(D[i]), power);
      power = (i == 0) ? 2.0 : power * 2.0;
    }
    out.push_back(record("dcs-bounds",
                         {{"case", std::to_string(t)},
                          {"depth", std::to_string(depth)},
                          {"len", std::to_string(len)}},
                         "count_over_bound",
                         static_cast<double>(count.count) / bound));
  }
  return out;
}

std::vector<ReportRecord> run_berry_esseen(const ExperimentConfig& config) {
  const std::size_t samples = config.params.value("samples", std::size_t{20000});
  if (samples > 1000000) throw std::invalid_argument("berry-esseen: budget");
  std::vector<int> n_list =
      config.params.value("N", std::vector<int>{16, 64, 256, 1024});
  const ProcessModel process = srw_process(1);
  std::vector<ReportRecord> out;
  for (int N : n_list) {
    const double gap = berry_esseen_gap(process, N, samples, config.seed);
    out.push_back(record("berry-esseen", {{"N", std::to_string(N)}},
                         "sup_cdf_gap", gap));
  }
  return out;
}

std::vector<ReportRecord> run_invariance(const ExperimentConfig& config) {
  const std::size_t samples = config.params.value("samples", std::size_t{20000});
  if (samples > 1000000) throw std::invalid_argument("invariance: budget");
  std::vector<int> n_list = config.params.value("N", std::vector<int>{64, 256});
  ProcessModel process = srw_process(1);
  if (config.params.contains("process"))
    process = process_from_json(config.params["process"]);
  std::vector<ReportRecord> out;
  for (int N : n_list) {
    const std::vector<FunctionalGap> gaps =
        invariance_gap(process, N, samples, config.seed);
    for (const auto& gap : gaps)
      out.push_back(record("invariance",
                           {{"N", std::to_string(N)},
                            {"functional", gap.functional}},
                           "ks_gap", gap.ks,
                           std::numeric_limits<double>::quiet_NaN(),
                           std::numeric_limits<double>::quiet_NaN(),
                           gap.degenerate ? "degenerate" : ""));
  }
  return out;
}

std::vector<ReportRecord> run_mutual_info(const ExperimentConfig& config) {
  const std::size_t samples = config.params.value("samples", std::size_t{50000});
  if (samples > 2000000) throw std::invalid_argument("mutual-info: budget");
  std::vector<int> n_list = config.params.value("N", std::vector<int>{4, 8});
  const MarkovSystem chain =
      config.params.contains("transitions")
          ? build_markov_system(config.params["transitions"]
                                    .get<std::vector<std::vector<double>>>())
          : iid_uniform_system(2);
  std::vector<ReportRecord> out;
  for (int N : n_list) {
    const std::vector<std::vector<int>> paths =
        sample_paths(chain, N, samples, config.seed);
    std::vector<int> past(samples), future(samples);
    for (std::size_t s = 0; s < samples; ++s) {
      int past_key = 0, future_key = 0;
      for (int t = 0; t < N; ++t) {
        past_key = past_key * static_cast<int>(chain.alphabet) +
                   paths[s][static_cast<std::size_t>(t)];
        future_key = future_key * static_cast<int>(chain.alphabet) +
                     paths[s][static_cast<std::size_t>(N + t)];
      }
      past[s] = past_key;
      future[s] = future_key;
    }
    const double info = mutual_information(past, future);
    const double bound = plugin_bias_bound(
        static_cast<std::size_t>(std::pow(chain.alphabet, N)),
        static_cast<std::size_t>(std::pow(chain.alphabet, N)), samples);
    out.push_back(record("mutual-info", {{"N", std::to_string(N)}},
                         "plugin_mi", info, std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN(),
                         info <= bound ? "within_bias_bound" : ""));
  }
  return out;
}

std::vector<ReportRecord> run_cover_lemmas(const ExperimentConfig& config) {
  const int instances = config.params.value("instances", 25);
  std::vector<ReportRecord> out;
  int coverage_ok = 0;
  for (int t = 0; t < instances; ++t) {
    RngStream rng(config.seed, "cover-lemmas", static_cast<std::uint64_t>(t));
    const std::size_t m = 200;
    std::vector<double> w(m, 1.0 / static_cast<double>(m));
    std::vector<int> s_labels(m), t_labels(m);
    for (std::size_t i = 0; i < m; ++i) {
      const int z = static_cast<int>(rng.next_below(3));
      s_labels[i] = z * 10 + static_cast<int>(rng.next_below(3));
      t_labels[i] = z * 10 + static_cast<int>(rng.next_below(3));
    }
    std::vector<char> U(m, 0);
    double mass = 0.0;
    for (std::size_t i = 0; i < m && mass < 0.6; ++i) {
      U[i] = 1;
      mass += w[i];
    }
    const EfficientCoverResult result =
        efficient_cover(w, s_labels, t_labels, U, 0.5, 0.2);
    if (result.coverage_ok) ++coverage_ok;
  }
  out.push_back(record("cover-lemmas", {{"instances", std::to_string(instances)}},
                       "coverage_ok_share",
                       static_cast<double>(coverage_ok) /
                           static_cast<double>(instances)));
  return out;
}

std::vector<ReportRecord> run_matching_extraction(const ExperimentConfig& config) {
  const int samples = config.params.value("samples", 10);
  if (samples > 200) throw std::invalid_argument("matching-extraction: budget");
  const ScaleLadder ladder = make_ladder_explicit({8, 8, 8});
  const ProcessModel process = srw_process(2);
  const int N = static_cast<int>(ladder.N(3));
  GoodTimeParams gt;
  gt.r = 1;
  gt.d = 3;
  MatchingParams mp;
  mp.r = 1;
  mp.d = 3;
  std::vector<ReportRecord> out;
  int successes = 0, verified = 0;
  for (int t = 0; t < samples; ++t) {
    const RwrsSample sample =
        sample_rwrs(process, N, config.seed, static_cast<std::uint64_t>(t));
    const MatchingExtraction identity =
        extract_matchings(sample, sample, process, ladder, mp);
    if (identity.success) {
      ++successes;
      if (identity.p1_ok && identity.p2_ok && identity.p3_ok) ++verified;
    }
  }
  out.push_back(record("matching-extraction",
                       {{"samples", std::to_string(samples)}},
                       "success_share",
                       static_cast<double>(successes) /
                           static_cast<double>(samples)));
  out.push_back(record("matching-extraction",
                       {{"samples", std::to_string(samples)}},
                       "verified_share",
                       successes == 0 ? 0.0
                                      : static_cast<double>(verified) /
                                            static_cast<double>(successes)));
  return out;
}

}  // namespace

std::vector<std::string> experiment_catalog() {
  return {"bernoulli-triviality", "rotation-bicov", "rwrs-rate", "psi-bm",
          "meandering", "dcs-bounds", "berry-esseen", "invariance",
          "mutual-info", "cover-lemmas", "matching-extraction"};
}

std::vector<ReportRecord> run_experiment(const ExperimentConfig& config) {
  using Runner = std::vector<ReportRecord> (*)(const ExperimentConfig&);
  static const std::map<std::string, Runner> registry = {
      {"bernoulli-triviality", run_bernoulli_triviality},
      {"rotation-bicov", run_rotation_bicov},
      {"rwrs-rate", run_rwrs_rate},
      {"psi-bm", run_psi_bm},
      {"meandering", run_meandering},
      {"dcs-bounds", run_dcs_bounds},
      {"berry-esseen", run_berry_esseen},
      {"invariance", run_invariance},
      {"mutual-info", run_mutual_info},
      {"cover-lemmas", run_cover_lemmas},
      {"matching-extraction", run_matching_extraction},
  };
  const auto it = registry.find(config.name);
  if (it == registry.end()) {
    std::ostringstream message;
    message << "unknown experiment '" << config.name << "'; catalog:";
    for (const auto& name : experiment_catalog()) message << " " << name;
    throw std::invalid_argument(message.str());
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<ReportRecord> records = it->second(config);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  for (auto& record : records)
    if (record.seconds == 0.0) record.seconds = seconds;
  return records;
}

}  // namespace rwrslab
