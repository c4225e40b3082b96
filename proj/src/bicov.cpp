#include "rwrslab/bicov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

constexpr double kTol = 1e-9;

double mass_of(const std::vector<char>& mask, const std::vector<double>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) total += w[i];
  return total;
}

}  // namespace

void CompetitionConfig::validate() const {
  if (alpha < 1.0) throw std::invalid_argument("config: alpha < 1");
  if (!(kappa > kappa_prime && kappa_prime > 0.0))
    throw std::invalid_argument("config: need kappa > kappa' > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("config: delta <= 0");
  if (miner_budget < 1 || maxer_restarts < 0)
    throw std::invalid_argument("config: bad budgets");
}

bool BicovProfileResult::verify(const SampledPairSpace& space,
                                const CompetitionConfig& config) const {
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (miner_weights[i] < -kTol) return false;
    if (miner_weights[i] > config.alpha * space.weights[i] + kTol) return false;
  }
  double total = 0.0;
  for (double w : miner_weights) total += w;
  if (std::abs(total - 1.0) > 1e-6) return false;
  if (mass_of(maxer_subset, miner_weights) < config.kappa - kTol) return false;
  std::vector<char> seed(space.size(), 0);
  for (std::size_t c : witness.centers) seed[c] = 1;
  const std::vector<char> hood =
      bi_neighbourhood_mask(space, seed, witness.radius, &maxer_subset);
  double hood_mass = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i)
    if (hood[i]) hood_mass += miner_weights[i];
  return hood_mass > config.kappa_prime - kTol;
}

namespace {

// Conditional measure on a mask (density 1/mass <= alpha when mass >= 1/alpha).
std::vector<double> conditional_weights(const std::vector<double>& base,
                                        const std::vector<char>& mask) {
  double mass = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i)
    if (mask[i]) mass += base[i];
  std::vector<double> out(base.size(), 0.0);
  if (mass <= 0.0) return out;
  for (std::size_t i = 0; i < base.size(); ++i)
    if (mask[i]) out[i] = base[i] / mass;
  return out;
}

bool density_ok(const std::vector<double>& weights,
                const std::vector<double>& base, double alpha) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < -kTol) return false;
    if (weights[i] > alpha * base[i] + kTol) return false;
  }
  return true;
}

// Group sample indices by a discrete signature; returns masks of signature
// classes merged (largest first) until they reach mass >= 1/alpha.
std::vector<char> mass_class_mask(const std::vector<double>& base,
                                  const std::vector<long long>& signature,
                                  double alpha) {
  std::map<long long, double> class_mass;
  for (std::size_t i = 0; i < signature.size(); ++i)
    class_mass[signature[i]] += base[i];
  std::vector<std::pair<double, long long>> order;
  for (const auto& [key, mass] : class_mass) order.emplace_back(mass, key);
  std::sort(order.rbegin(), order.rend());
  std::map<long long, char> chosen;
  double mass = 0.0;
  for (const auto& [m, key] : order) {
    chosen[key] = 1;
    mass += m;
    if (mass >= 1.0 / alpha) break;
  }
  std::vector<char> mask(signature.size(), 0);
  if (mass < 1.0 / alpha) return mask;  // degenerate; caller drops it
  for (std::size_t i = 0; i < signature.size(); ++i)
    if (chosen.count(signature[i])) mask[i] = 1;
  return mask;
}

}  // namespace

std::vector<MinerCandidate> miner_candidates(
    const SampledPairSpace& space, const std::vector<RwrsSample>* samples,
    const ProcessModel* process, double alpha, int budget, std::uint64_t seed) {
  (void)seed;
  std::vector<MinerCandidate> out;
  out.push_back({space.weights, "original"});
  if (alpha <= 1.0 + 1e-12 || !samples || !process ||
      samples->size() != space.size())
    return out;

  const std::size_t m = space.size();
  const int N = (*samples)[0].N;
  const double sqrt_n = std::sqrt(static_cast<double>(N));

  // Trajectory-window classes: quantized rescaled past/future checkpoints.
  for (double grid : {1.0, 0.5}) {
    if (static_cast<int>(out.size()) >= budget) break;
    std::vector<long long> signature(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const RwrsSample& s = (*samples)[i];
      const double f_half = s.sum(N / 2) / sqrt_n;
      const double f_full = s.sum(N) / sqrt_n;
      const double b_half = s.sum(-N / 2) / sqrt_n;
      const double b_full = s.sum(-N) / sqrt_n;
      long long key = 0;
      for (double v : {f_half, f_full, b_half, b_full}) {
        const long long q =
            static_cast<long long>(std::floor(v / grid)) & 0xffffLL;
        key = (key << 16) ^ q;
      }
      signature[i] = key;
    }
    const std::vector<char> mask = mass_class_mask(space.weights, signature, alpha);
    const std::vector<double> weights = conditional_weights(space.weights, mask);
    if (density_ok(weights, space.weights, alpha) &&
        std::accumulate(weights.begin(), weights.end(), 0.0) > 0.5)
      out.push_back({weights, "traj-grid-" + std::to_string(grid)});
  }

  // Shannon-McMillan-typical scenery classes: order samples by per-site
  // scenery log-likelihood and keep the most typical 1/alpha of the mass.
  if (!process->scenery.trivial() &&
      process->scenery.kind == SceneryKind::kIid &&
      static_cast<int>(out.size()) < budget) {
    std::vector<double> loglik(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const RwrsSample& s = (*samples)[i];
      double lo = 0.0, hi = 0.0;
      for (int n = -N; n <= N; ++n) {
        lo = std::min(lo, s.sum(n));
        hi = std::max(hi, s.sum(n));
      }
      const std::int64_t site_lo = scenery_site(lo, s.cell_width);
      const std::int64_t site_hi = scenery_site(hi, s.cell_width);
      double ll = 0.0;
      for (std::int64_t site = site_lo; site <= site_hi; ++site) {
        const double p =
            process->scenery
                .probs[static_cast<std::size_t>(s.colour_at_site(site))];
        ll += std::log(std::max(p, 1e-300));
      }
      loglik[i] = ll / static_cast<double>(site_hi - site_lo + 1);
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const double target = -process->scenery.entropy();
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(loglik[a] - target) < std::abs(loglik[b] - target);
    });
    std::vector<char> mask(m, 0);
    double mass = 0.0;
    for (std::size_t i : order) {
      mask[i] = 1;
      mass += space.weights[i];
      if (mass >= 1.0 / alpha) break;
    }
    const std::vector<double> weights = conditional_weights(space.weights, mask);
    if (density_ok(weights, space.weights, alpha) && mass >= 1.0 / alpha)
      out.push_back({weights, "sm-typical-scenery"});
  }
  return out;
}

std::vector<std::pair<std::vector<char>, std::string>> maxer_subsets(
    const SampledPairSpace& space, const std::vector<double>& miner_weights,
    double kappa, double delta, int restarts, std::uint64_t seed) {
  const std::size_t m = space.size();
  std::vector<std::pair<std::vector<char>, std::string>> out;
  out.emplace_back(std::vector<char>(m, 1), "full");

  // Greedy bi-cover-resistant trimming: repeatedly drop the points whose
  // bi-neighbourhoods carry the largest miner mass, while mu'(U) stays
  // >= kappa.  A work budget keeps dense adjacency structures tractable;
  // when it runs out the current subset is kept as-is.
  {
    const BiAdjacency adjacency = build_bi_adjacency(space, delta);
    std::vector<char> u(m, 1);
    double mass = std::accumulate(miner_weights.begin(), miner_weights.end(), 0.0);
    const std::size_t batch = std::max<std::size_t>(1, m / 50);
    long long work_budget = 200'000'000;
    bool progress = true;
    while (progress && work_budget > 0) {
      progress = false;
      std::vector<std::pair<double, std::size_t>> hood_mass;
      for (std::size_t i = 0; i < m && work_budget > 0; ++i) {
        if (!u[i] || miner_weights[i] <= 0.0) continue;
        const std::vector<int> hood =
            point_bi_neighbourhood(adjacency, static_cast<int>(i), &u);
        long long visited = 8;
        for (int k : adjacency.adj1[i])
          visited += static_cast<long long>(
              adjacency.adj2[static_cast<std::size_t>(k)].size());
        work_budget -= visited;
        double hm = 0.0;
        for (int j : hood) hm += miner_weights[static_cast<std::size_t>(j)];
        hood_mass.emplace_back(hm, i);
      }
      std::sort(hood_mass.rbegin(), hood_mass.rend());
      std::size_t dropped = 0;
      for (const auto& [hm, i] : hood_mass) {
        if (dropped >= batch) break;
        if (mass - miner_weights[i] < kappa) continue;
        u[i] = 0;
        mass -= miner_weights[i];
        ++dropped;
        progress = true;
      }
      if (dropped < batch) break;
    }
    out.emplace_back(std::move(u), "greedy-resistant");
  }

  RngStream rng(seed, "maxer_restarts", 0);
  for (int t = 0; t < restarts; ++t) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    std::vector<char> u(m, 0);
    double mass = 0.0;
    for (std::size_t i : order) {
      u[i] = 1;
      mass += miner_weights[i];
      if (mass >= kappa) break;
    }
    if (mass >= kappa)
      out.emplace_back(std::move(u), "random-" + std::to_string(t));
  }
  return out;
}

BicovProfileResult estimate_bicov_profile(const SampledPairSpace& space,
                                          const CompetitionConfig& config,
                                          const std::vector<RwrsSample>* samples,
                                          const ProcessModel* process) {
  config.validate();
  const std::vector<MinerCandidate> candidates = miner_candidates(
      space, samples, process, config.alpha, config.miner_budget, config.seed);

  BicovProfileResult best;
  bool have_best = false;
  bool all_exact = config.exact_inner;
  for (const MinerCandidate& miner : candidates) {
    // Max-er: maximize the inner value over subset strategies.
    BicovProfileResult worst_for_miner;
    bool have_inner = false;
    const auto subsets =
        maxer_subsets(space, miner.weights, config.kappa, config.delta,
                      config.maxer_restarts, config.seed);
    for (const auto& [u, maxer_id] : subsets) {
      if (mass_of(u, miner.weights) < config.kappa - kTol) continue;
      CoverResult inner;
      try {
        inner = bicov_partial(space, config.kappa_prime, config.delta,
                              config.exact_inner, &u, &miner.weights);
      } catch (const std::invalid_argument&) {
        continue;  // unreachable mass in this subspace
      }
      if (!have_inner || inner.count > worst_for_miner.value) {
        worst_for_miner.value = inner.count;
        worst_for_miner.miner_weights = miner.weights;
        worst_for_miner.maxer_subset = u;
        worst_for_miner.witness = inner.witness;
        worst_for_miner.miner_id = miner.id;
        worst_for_miner.maxer_id = maxer_id;
        worst_for_miner.exact = inner.exact;
        have_inner = true;
      }
    }
    if (!have_inner) continue;
    if (!have_best || worst_for_miner.value < best.value) {
      best = worst_for_miner;
      have_best = true;
    }
  }
  if (!have_best)
    throw std::runtime_error("estimate_bicov_profile: no feasible play");
  // The heuristic Max-er does not exhaust subsets, so exactness holds only
  // for the exhaustive path in exact_bicov_profile.
  best.exact = false;
  (void)all_exact;
  return best;
}

BicovProfileResult exact_bicov_profile(const SampledPairSpace& space,
                                       const CompetitionConfig& config) {
  config.validate();
  const std::size_t m = space.size();
  if (m > 12)
    throw std::invalid_argument("exact_bicov_profile: capped at 12 points");
  const std::uint32_t full = (1u << m) - 1;

  // Precompute single-point bi-neighbourhood masks for every subspace U is
  // too big; instead compute per (U) lazily using dist masks at delta.
  std::vector<std::uint32_t> adj1(m, 0), adj2(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const bool near1 = config.delta > 0.0
                             ? space.dist1(i, j) < config.delta
                             : space.dist1(i, j) <= 0.0;
      const bool near2 = config.delta > 0.0
                             ? space.dist2(i, j) < config.delta
                             : space.dist2(i, j) <= 0.0;
      if (near1) adj1[i] |= (1u << j);
      if (near2) adj2[i] |= (1u << j);
    }

  auto mask_mass = [&](std::uint32_t mask, const std::vector<double>& w) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (mask & (1u << i)) total += w[i];
    return total;
  };

  BicovProfileResult best;
  best.value = std::numeric_limits<std::size_t>::max();

  for (std::uint32_t a_mask = 1; a_mask <= full; ++a_mask) {
    const double a_mass = mask_mass(a_mask, space.weights);
    if (a_mass + kTol < 1.0 / config.alpha) continue;
    std::vector<double> miner(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (a_mask & (1u << i)) miner[i] = space.weights[i] / a_mass;

    std::size_t inner_max = 0;
    std::uint32_t worst_u = 0;
    CoverWitness worst_witness;
    bool dominated = false;
    for (std::uint32_t u_mask = 1; u_mask <= full && !dominated; ++u_mask) {
      if (mask_mass(u_mask, miner) < config.kappa - kTol) continue;
      // Inner exact cover: smallest F subset of U whose subspace
      // bi-neighbourhood holds miner mass > kappa'.
      std::vector<std::uint32_t> hoods(m, 0);
      for (std::size_t i = 0; i < m; ++i) {
        if (!(u_mask & (1u << i))) continue;
        const std::uint32_t mid = adj1[i] & u_mask;
        std::uint32_t hood = 0;
        for (std::size_t k = 0; k < m; ++k)
          if (mid & (1u << k)) hood |= adj2[k];
        hoods[i] = hood & u_mask;
      }
      std::size_t inner = std::numeric_limits<std::size_t>::max();
      CoverWitness witness;
      // Iterative deepening over F by size.
      std::vector<std::size_t> points;
      for (std::size_t i = 0; i < m; ++i)
        if (u_mask & (1u << i)) points.push_back(i);
      for (std::size_t k = 1; k <= points.size(); ++k) {
        std::vector<std::size_t> chosen;
        std::function<bool(std::uint32_t, std::size_t, std::size_t)> dfs =
            [&](std::uint32_t covered, std::size_t start, std::size_t left) {
              if (mask_mass(covered, miner) > config.kappa_prime) return true;
              if (left == 0) return false;
              for (std::size_t idx = start; idx < points.size(); ++idx) {
                chosen.push_back(points[idx]);
                if (dfs(covered | hoods[points[idx]], idx + 1, left - 1))
                  return true;
                chosen.pop_back();
              }
              return false;
            };
        if (dfs(0, 0, k)) {
          inner = k;
          witness.centers = chosen;
          witness.radius = config.delta;
          std::uint32_t covered = 0;
          for (std::size_t c : chosen) covered |= hoods[c];
          witness.covered_mass = mask_mass(covered, miner);
          break;
        }
      }
      if (inner == std::numeric_limits<std::size_t>::max())
        continue;  // this U cannot be covered to kappa'; skip (no legal play)
      if (inner > inner_max) {
        inner_max = inner;
        worst_u = u_mask;
        worst_witness = witness;
        if (inner_max >= best.value) dominated = true;  // Min-er prunes
      }
    }
    if (dominated) continue;
    if (inner_max > 0 && inner_max < best.value) {
      best.value = inner_max;
      best.miner_weights = miner;
      best.maxer_subset.assign(m, 0);
      for (std::size_t i = 0; i < m; ++i)
        if (worst_u & (1u << i)) best.maxer_subset[i] = 1;
      best.witness = worst_witness;
      best.miner_id = "conditional";
      best.maxer_id = "exhaustive";
      best.exact = true;
    }
  }
  if (best.value == std::numeric_limits<std::size_t>::max())
    throw std::runtime_error("exact_bicov_profile: no feasible play");
  return best;
}

RateCurve rate_curve(const ProcessModel& process, const std::vector<int>& n_list,
                     const CompetitionConfig& config, std::size_t m,
                     const std::vector<std::uint64_t>& seeds, int workers) {
  RateCurve curve;
  std::vector<std::vector<double>> per_seed_logs(
      seeds.size(), std::vector<double>(n_list.size(), 0.0));
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      const int N = n_list[ni];
      const std::vector<RwrsSample> samples =
          sample_rwrs_batch(process, N, m, seeds[s]);
      const SampledPairSpace space =
          pair_space_from_samples(samples, process, N, workers);
      CompetitionConfig local = config;
      local.delta = config.delta * static_cast<double>(N);
      local.seed = seeds[s];
      const BicovProfileResult result =
          estimate_bicov_profile(space, local, &samples, &process);
      per_seed_logs[s][ni] = std::log(static_cast<double>(result.value));
    }
  }

  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    RateCurvePoint point;
    point.N = n_list[ni];
    for (std::size_t s = 0; s < seeds.size(); ++s)
      point.per_seed_log_values.push_back(per_seed_logs[s][ni]);
    double mean = 0.0;
    for (double v : point.per_seed_log_values) mean += v;
    mean /= static_cast<double>(seeds.size());
    double var = 0.0;
    for (double v : point.per_seed_log_values) var += (v - mean) * (v - mean);
    var /= std::max<double>(1.0, static_cast<double>(seeds.size() - 1));
    const double se = std::sqrt(var / static_cast<double>(seeds.size()));
    point.mean_log_value = mean;
    point.ci_lo = mean - 1.96 * se;
    point.ci_hi = mean + 1.96 * se;
    curve.points.push_back(point);
  }

  // Least-squares slope of log value on sqrt(N), per seed, then aggregated.
  auto slope_of = [&](const std::vector<double>& logs) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      const double x = std::sqrt(static_cast<double>(n_list[i]));
      sx += x;
      sy += logs[i];
      sxx += x * x;
      sxy += x * logs[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  std::vector<double> slopes;
  for (const auto& logs : per_seed_logs) slopes.push_back(slope_of(logs));
  double mean = 0.0;
  for (double v : slopes) mean += v;
  mean /= static_cast<double>(slopes.size());
  double var = 0.0;
  for (double v : slopes) var += (v - mean) * (v - mean);
  var /= std::max<double>(1.0, static_cast<double>(slopes.size() - 1));
  const double se = std::sqrt(var / static_cast<double>(slopes.size()));
  curve.slope = mean;
  curve.slope_ci_lo = mean - 1.96 * se;
  curve.slope_ci_hi = mean + 1.96 * se;
  return curve;
}

double theoretical_rate(double alpha, double h,
                        const std::vector<PsiReferenceEntry>& table) {
  if (alpha < 1.0) throw std::invalid_argument("theoretical_rate: alpha < 1");
  if (h < 0.0) throw std::invalid_argument("theoretical_rate: h < 0");
  if (alpha == 1.0) {
    // 0 * infinity convention: the degenerate rate is 0 when h == 0.
    return h == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (h == 0.0) return 0.0;
  // Linear interpolation in alpha between tabulated quantiles.
  const PsiReferenceEntry* lo = nullptr;
  const PsiReferenceEntry* hi = nullptr;
  for (const auto& entry : table) {
    if (entry.alpha <= alpha && (!lo || entry.alpha > lo->alpha)) lo = &entry;
    if (entry.alpha >= alpha && (!hi || entry.alpha < hi->alpha)) hi = &entry;
  }
  if (!lo || !hi)
    throw std::invalid_argument("theoretical_rate: alpha outside table");
  if (lo == hi) return lo->psi * h;
  const double t = (alpha - lo->alpha) / (hi->alpha - lo->alpha);
  return (lo->psi + t * (hi->psi - lo->psi)) * h;
}

std::vector<PsiReferenceEntry> load_psi_reference(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open psi reference: " + path);
  nlohmann::json doc;
  in >> doc;
  std::vector<PsiReferenceEntry> table;
  for (const auto& item : doc.at("entries")) {
    PsiReferenceEntry entry;
    entry.alpha = item.at("alpha").get<double>();
    entry.psi = item.at("psi").get<double>();
    entry.ci_lo = item.at("ci_lo").get<double>();
    entry.ci_hi = item.at("ci_hi").get<double>();
    table.push_back(entry);
  }
  return table;
}

}  // namespace rwrslab
