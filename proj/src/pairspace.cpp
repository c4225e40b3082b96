#include "rwrslab/pairspace.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

bool within_radius(double d, double r) {
  // Strict open balls; r == 0 degenerates to the zero-distance relation.
  return r > 0.0 ? d < r : d <= 0.0;
}

void check_matrix(const DistanceMatrix& dist, std::size_t m,
                  const char* label) {
  if (dist.size() != m)
    throw std::invalid_argument(std::string(label) + ": dimension mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (dist(i, i) != 0.0)
      throw std::invalid_argument(std::string(label) + ": nonzero diagonal");
    for (std::size_t j = i + 1; j < m; ++j) {
      const double d = dist(i, j);
      if (!std::isfinite(d) || d < 0.0)
        throw std::invalid_argument(std::string(label) + ": bad entry");
      if (d != dist(j, i))
        throw std::invalid_argument(std::string(label) + ": not symmetric");
    }
  }
}

void check_weights(const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw std::invalid_argument("weights: negative entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("weights: do not sum to 1");
}

double mass_of(const std::vector<char>& mask, const std::vector<double>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) total += w[i];
  return total;
}

}  // namespace

void SampledSpace::validate() const {
  if (size() == 0) throw std::invalid_argument("empty space");
  if (size() > kMaxPoints) throw std::invalid_argument("point cap exceeded");
  check_weights(weights);
  check_matrix(dist, size(), "dist");
}

void SampledPairSpace::validate() const {
  if (size() == 0) throw std::invalid_argument("empty space");
  if (size() > kMaxPoints) throw std::invalid_argument("point cap exceeded");
  check_weights(weights);
  check_matrix(dist1, size(), "dist1");
  check_matrix(dist2, size(), "dist2");
}

SampledSpace SampledPairSpace::marginal(int which) const {
  SampledSpace out;
  out.weights = weights;
  out.dist = (which == 1) ? dist1 : dist2;
  return out;
}

std::size_t base_hamming_metric(const std::vector<int>& u,
                                const std::vector<int>& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("base_hamming_metric: length mismatch");
  std::size_t count = 0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] != v[i]) ++count;
  return count;
}

double dynamic_metric(const std::vector<int>& orbit_a,
                      const std::vector<int>& orbit_b,
                      const std::function<double(int, int)>& base_dist,
                      DynamicMode mode) {
  if (orbit_a.size() != orbit_b.size())
    throw std::invalid_argument("dynamic_metric: length mismatch");
  double acc = 0.0;
  for (std::size_t n = 0; n < orbit_a.size(); ++n) {
    const double d = base_dist(orbit_a[n], orbit_b[n]);
    if (mode == DynamicMode::kSum)
      acc += d;
    else
      acc = std::max(acc, d);
  }
  return acc;
}

std::vector<char> ball_of_set(const SampledSpace& space, const PointSet& seed,
                              double r) {
  const std::size_t m = space.size();
  std::vector<char> mask(m, 0);
  for (std::size_t i : seed)
    for (std::size_t j = 0; j < m; ++j)
      if (!mask[j] && within_radius(space.dist(i, j), r)) mask[j] = 1;
  return mask;
}

std::vector<char> bi_neighbourhood_mask(const SampledPairSpace& space,
                                        const std::vector<char>& seed,
                                        double delta,
                                        const std::vector<char>* within) {
  const std::size_t m = space.size();
  std::vector<char> mid(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (!seed[i]) continue;
    for (std::size_t k = 0; k < m; ++k) {
      if (mid[k] || (within && !(*within)[k])) continue;
      if (within_radius(space.dist1(i, k), delta)) mid[k] = 1;
    }
  }
  std::vector<char> out(m, 0);
  for (std::size_t k = 0; k < m; ++k) {
    if (!mid[k]) continue;
    for (std::size_t j = 0; j < m; ++j) {
      if (out[j] || (within && !(*within)[j])) continue;
      if (within_radius(space.dist2(k, j), delta)) out[j] = 1;
    }
  }
  return out;
}

PointSet bi_neighbourhood(const SampledPairSpace& space, const PointSet& seed,
                          double delta) {
  if (seed.empty()) throw std::invalid_argument("bi_neighbourhood: empty seed");
  if (delta < 0.0) throw std::invalid_argument("bi_neighbourhood: delta < 0");
  std::vector<char> mask(space.size(), 0);
  for (std::size_t i : seed) mask.at(i) = 1;
  const std::vector<char> out = bi_neighbourhood_mask(space, mask, delta);
  PointSet result;
  for (std::size_t j = 0; j < out.size(); ++j)
    if (out[j]) result.push_back(j);
  return result;
}

bool is_bi_separated(const SampledPairSpace& space, std::size_t i,
                     std::size_t j, double delta) {
  const PointSet a = bi_neighbourhood(space, {i}, delta);
  const PointSet b = bi_neighbourhood(space, {j}, delta);
  std::vector<char> mask(space.size(), 0);
  for (std::size_t x : a) mask[x] = 1;
  for (std::size_t x : b)
    if (mask[x]) return false;
  return true;
}

BiAdjacency build_bi_adjacency(const SampledPairSpace& space, double delta) {
  const std::size_t m = space.size();
  BiAdjacency adjacency;
  adjacency.delta = delta;
  adjacency.adj1.resize(m);
  adjacency.adj2.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (within_radius(space.dist1(i, j), delta))
        adjacency.adj1[i].push_back(static_cast<int>(j));
      if (within_radius(space.dist2(i, j), delta))
        adjacency.adj2[i].push_back(static_cast<int>(j));
    }
  return adjacency;
}

std::vector<int> point_bi_neighbourhood(const BiAdjacency& adjacency, int i,
                                        const std::vector<char>* within) {
  const std::size_t m = adjacency.adj1.size();
  std::vector<char> seen(m, 0);
  std::vector<int> out;
  for (int k : adjacency.adj1[static_cast<std::size_t>(i)]) {
    if (within && !(*within)[static_cast<std::size_t>(k)]) continue;
    for (int j : adjacency.adj2[static_cast<std::size_t>(k)]) {
      if (seen[static_cast<std::size_t>(j)]) continue;
      if (within && !(*within)[static_cast<std::size_t>(j)]) continue;
      seen[static_cast<std::size_t>(j)] = 1;
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Exhaustive minimum set cover over <= kExactCoverCap elements via
// iterative-deepening DFS with a simple uncovered/remaining prune.
struct ExactCoverSolver {
  // sets[i] = coverage mask of candidate i, as a bitmask over elements.
  std::vector<std::uint32_t> sets;
  std::uint32_t universe = 0;

  // Returns candidate indices of a minimum cover, or nullopt when even all
  // sets together do not cover the universe.
  std::optional<std::vector<int>> solve() {
    std::uint32_t all = 0;
    for (auto s : sets) all |= s;
    if ((all & universe) != universe) return std::nullopt;
    for (std::size_t k = 1; k <= sets.size(); ++k) {
      std::vector<int> chosen;
      if (dfs(universe, 0, k, chosen)) return chosen;
    }
    return std::nullopt;
  }

 private:
  bool dfs(std::uint32_t uncovered, std::size_t start, std::size_t budget,
           std::vector<int>& chosen) {
    if (uncovered == 0) return true;
    if (budget == 0) return false;
    // Branch on an uncovered element with the fewest covering sets.
    int pivot = -1;
    int best = std::numeric_limits<int>::max();
    for (int e = 0; e < 32; ++e) {
      if (!(uncovered & (1u << e))) continue;
      int cnt = 0;
      for (std::size_t i = start; i < sets.size(); ++i)
        if (sets[i] & (1u << e)) ++cnt;
      if (cnt == 0) return false;
      if (cnt < best) {
        best = cnt;
        pivot = e;
      }
    }
    for (std::size_t i = start; i < sets.size(); ++i) {
      if (!(sets[i] & (1u << pivot))) continue;
      chosen.push_back(static_cast<int>(i));
      if (dfs(uncovered & ~sets[i], start, budget - 1, chosen)) return true;
      chosen.pop_back();
    }
    return false;
  }
};

// Exhaustive minimum partial cover: smallest |F| whose union mass > a.
struct ExactPartialSolver {
  std::vector<std::uint32_t> sets;       // coverage masks
  std::vector<double> element_mass;      // mass per element
  double target = 0.0;                   // strict threshold

  std::optional<std::vector<int>> solve() {
    double best_single = 0.0;
    for (auto s : sets) best_single = std::max(best_single, mass(s));
    std::uint32_t all = 0;
    for (auto s : sets) all |= s;
    if (!(mass(all) > target)) return std::nullopt;
    for (std::size_t k = 1; k <= sets.size(); ++k) {
      std::vector<int> chosen;
      if (dfs(0u, 0, k, chosen, best_single)) return chosen;
    }
    return std::nullopt;
  }

  double mass(std::uint32_t s) const {
    double total = 0.0;
    for (int e = 0; e < 32; ++e)
      if (s & (1u << e)) total += element_mass[e];
    return total;
  }

 private:
  bool dfs(std::uint32_t covered, std::size_t start, std::size_t budget,
           std::vector<int>& chosen, double best_single) {
    const double cur = mass(covered);
    if (cur > target) return true;
    if (budget == 0) return false;
    if (cur + static_cast<double>(budget) * best_single <= target) return false;
    for (std::size_t i = start; i < sets.size(); ++i) {
      chosen.push_back(static_cast<int>(i));
      if (dfs(covered | sets[i], i + 1, budget - 1, chosen, best_single))
        return true;
      chosen.pop_back();
    }
    return false;
  }
};

}  // namespace

CoverResult covering_number(const SampledSpace& space, double r,
                            const std::optional<PointSet>& subset,
                            bool exact) {
  if (!(r > 0.0)) throw std::invalid_argument("covering_number: r <= 0");
  PointSet points;
  if (subset) {
    points = *subset;
  } else {
    points.resize(space.size());
    std::iota(points.begin(), points.end(), std::size_t{0});
  }
  if (points.empty()) throw std::invalid_argument("covering_number: empty set");

  const std::size_t n = points.size();
  // Coverage sets restricted to the subset, one per candidate center.
  std::vector<std::vector<char>> covers(n, std::vector<char>(n, 0));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      covers[a][b] = within_radius(space.dist(points[a], points[b]), r) ? 1 : 0;

  CoverResult result;
  result.witness.radius = r;
  if (exact) {
    if (n > kExactCoverCap)
      throw std::invalid_argument("covering_number: exact mode capped at 20");
    ExactCoverSolver solver;
    solver.universe = (n == 32) ? ~0u : ((1u << n) - 1);
    solver.sets.resize(n, 0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (covers[a][b]) solver.sets[a] |= (1u << b);
    auto chosen = solver.solve();
    if (!chosen)
      throw std::invalid_argument("covering_number: subset not coverable");
    result.count = chosen->size();
    result.exact = true;
    for (int c : *chosen) result.witness.centers.push_back(points[c]);
  } else {
    // Greedy: largest uncovered mass first, lowest id on ties.
    std::vector<char> covered(n, 0);
    std::size_t covered_count = 0;
    while (covered_count < n) {
      std::size_t best = n;
      double best_gain = -1.0;
      for (std::size_t a = 0; a < n; ++a) {
        double gain = 0.0;
        for (std::size_t b = 0; b < n; ++b)
          if (!covered[b] && covers[a][b]) gain += space.weights[points[b]];
        if (gain > best_gain + 1e-18) {
          best_gain = gain;
          best = a;
        }
      }
      bool progress = false;
      for (std::size_t b = 0; b < n; ++b)
        if (!covered[b] && covers[best][b]) {
          covered[b] = 1;
          ++covered_count;
          progress = true;
        }
      if (!progress)
        throw std::invalid_argument("covering_number: subset not coverable");
      result.witness.centers.push_back(points[best]);
    }
    result.count = result.witness.centers.size();
  }
  double mass = 0.0;
  const std::vector<char> ball = ball_of_set(space, result.witness.centers, r);
  for (std::size_t j = 0; j < space.size(); ++j)
    if (ball[j]) mass += space.weights[j];
  result.witness.covered_mass = mass;
  return result;
}

CoverResult partial_covering_number(const SampledSpace& space, double a,
                                    double r, bool exact) {
  if (!(a > 0.0 && a < 1.0))
    throw std::invalid_argument("partial_covering_number: a outside (0,1)");
  if (!(r > 0.0)) throw std::invalid_argument("partial_covering_number: r <= 0");
  const std::size_t m = space.size();
  CoverResult result;
  result.witness.radius = r;
  if (exact) {
    if (m > kExactCoverCap)
      throw std::invalid_argument(
          "partial_covering_number: exact mode capped at 20");
    ExactPartialSolver solver;
    solver.element_mass = space.weights;
    solver.target = a;
    solver.sets.resize(m, 0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (within_radius(space.dist(i, j), r)) solver.sets[i] |= (1u << j);
    auto chosen = solver.solve();
    if (!chosen)
      throw std::invalid_argument("partial_covering_number: mass unreachable");
    result.count = chosen->size();
    result.exact = true;
    for (int c : *chosen)
      result.witness.centers.push_back(static_cast<std::size_t>(c));
  } else {
    // Lazy greedy: gains only shrink as coverage grows, so a stale heap
    // entry re-evaluated at the top is safe.
    std::vector<std::vector<int>> balls(m);
    auto ball_of = [&](std::size_t i) -> const std::vector<int>& {
      if (balls[i].empty()) {
        for (std::size_t j = 0; j < m; ++j)
          if (within_radius(space.dist(i, j), r))
            balls[i].push_back(static_cast<int>(j));
      }
      return balls[i];
    };
    std::vector<char> covered(m, 0);
    double covered_mass = 0.0;
    // (gain bound, -id) max-heap with freshness stamps.
    std::vector<double> stale_gain(m, 0.0);
    std::priority_queue<std::pair<double, int>> heap;
    for (std::size_t i = 0; i < m; ++i) {
      double g = 0.0;
      for (int j : ball_of(i)) g += space.weights[static_cast<std::size_t>(j)];
      stale_gain[i] = g;
      heap.emplace(g, -static_cast<int>(i));
    }
    std::size_t rounds = 0;
    while (!(covered_mass > a)) {
      if (heap.empty())
        throw std::invalid_argument("partial_covering_number: mass unreachable");
      auto [bound, neg] = heap.top();
      heap.pop();
      const std::size_t i = static_cast<std::size_t>(-neg);
      double gain = 0.0;
      for (int j : ball_of(i))
        if (!covered[static_cast<std::size_t>(j)])
          gain += space.weights[static_cast<std::size_t>(j)];
      if (gain + 1e-18 < bound && !heap.empty() &&
          std::make_pair(gain, neg) < heap.top()) {
        stale_gain[i] = gain;
        heap.emplace(gain, neg);
        continue;
      }
      if (gain <= 0.0)
        throw std::invalid_argument("partial_covering_number: mass unreachable");
      for (int j : ball_of(i))
        if (!covered[static_cast<std::size_t>(j)]) {
          covered[static_cast<std::size_t>(j)] = 1;
          covered_mass += space.weights[static_cast<std::size_t>(j)];
        }
      result.witness.centers.push_back(i);
      if (++rounds > m)
        throw std::logic_error("partial_covering_number: greedy did not halt");
    }
    result.count = result.witness.centers.size();
  }
  const std::vector<char> ball = ball_of_set(space, result.witness.centers, r);
  double mass = 0.0;
  for (std::size_t j = 0; j < m; ++j)
    if (ball[j]) mass += space.weights[j];
  result.witness.covered_mass = mass;
  return result;
}

CoverResult bicov_partial(const SampledPairSpace& space, double a, double delta,
                          bool exact, const std::vector<char>* within,
                          const std::vector<double>* measure) {
  if (!(a > 0.0 && a < 1.0 + 1e-12))
    throw std::invalid_argument("bicov_partial: a outside (0,1)");
  if (!(delta > 0.0)) throw std::invalid_argument("bicov_partial: delta <= 0");
  const std::size_t m = space.size();
  const std::vector<double>& w = measure ? *measure : space.weights;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < m; ++i)
    if (!within || (*within)[i]) candidates.push_back(i);
  if (candidates.empty())
    throw std::invalid_argument("bicov_partial: empty subspace");

  const BiAdjacency adjacency = build_bi_adjacency(space, delta);
  std::vector<std::vector<int>> hoods(candidates.size());
  std::vector<char> hood_built(candidates.size(), 0);
  auto hood_of = [&](std::size_t c) -> const std::vector<int>& {
    if (!hood_built[c]) {
      hoods[c] = point_bi_neighbourhood(adjacency,
                                        static_cast<int>(candidates[c]), within);
      hood_built[c] = 1;
    }
    return hoods[c];
  };

  CoverResult result;
  result.witness.radius = delta;
  if (exact) {
    if (candidates.size() > kExactCoverCap)
      throw std::invalid_argument("bicov_partial: exact mode capped at 20");
    std::vector<std::size_t> candidate_pos(m, 0);
    for (std::size_t j = 0; j < candidates.size(); ++j)
      candidate_pos[candidates[j]] = j;
    ExactPartialSolver solver;
    solver.target = a;
    solver.element_mass.assign(candidates.size(), 0.0);
    for (std::size_t j = 0; j < candidates.size(); ++j)
      solver.element_mass[j] = w[candidates[j]];
    solver.sets.resize(candidates.size(), 0);
    for (std::size_t c = 0; c < candidates.size(); ++c)
      for (int j : hood_of(c))
        solver.sets[c] |= (1u << candidate_pos[static_cast<std::size_t>(j)]);
    auto chosen = solver.solve();
    if (!chosen)
      throw std::invalid_argument("bicov_partial: mass unreachable");
    result.count = chosen->size();
    result.exact = true;
    for (int c : *chosen) result.witness.centers.push_back(candidates[c]);
  } else {
    // Lazy greedy (gains are monotone under growing coverage); ties go to
    // the lowest point id through the (gain, -id) heap ordering.
    std::vector<char> covered(m, 0);
    double covered_mass = 0.0;
    std::priority_queue<std::pair<double, int>> heap;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      double g = 0.0;
      for (int j : hood_of(c)) g += w[static_cast<std::size_t>(j)];
      heap.emplace(g, -static_cast<int>(c));
    }
    std::size_t rounds = 0;
    while (!(covered_mass > a)) {
      if (heap.empty())
        throw std::invalid_argument("bicov_partial: mass unreachable");
      auto [bound, neg] = heap.top();
      heap.pop();
      const std::size_t c = static_cast<std::size_t>(-neg);
      double gain = 0.0;
      for (int j : hood_of(c))
        if (!covered[static_cast<std::size_t>(j)])
          gain += w[static_cast<std::size_t>(j)];
      if (gain + 1e-18 < bound && !heap.empty() &&
          std::make_pair(gain, neg) < heap.top()) {
        heap.emplace(gain, neg);
        continue;
      }
      if (gain <= 0.0)
        throw std::invalid_argument("bicov_partial: mass unreachable");
      for (int j : hood_of(c))
        if (!covered[static_cast<std::size_t>(j)]) {
          covered[static_cast<std::size_t>(j)] = 1;
          covered_mass += w[static_cast<std::size_t>(j)];
        }
      result.witness.centers.push_back(candidates[c]);
      if (++rounds > candidates.size())
        throw std::logic_error("bicov_partial: greedy did not halt");
    }
    result.count = result.witness.centers.size();
  }

  std::vector<char> seed(m, 0);
  for (std::size_t c : result.witness.centers) seed[c] = 1;
  const std::vector<char> hood = bi_neighbourhood_mask(space, seed, delta, within);
  result.witness.covered_mass = mass_of(hood, w);
  return result;
}

SampledPairSpace push_forward_space(const SampledPairSpace& source,
                                    const std::vector<std::size_t>& map,
                                    const SampledPairSpace& target) {
  if (map.size() != source.size())
    throw std::invalid_argument("push_forward_space: map not total");
  SampledPairSpace out = target;
  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (map[i] >= target.size())
      throw std::invalid_argument("push_forward_space: map out of range");
    out.weights[map[i]] += source.weights[i];
  }
  return out;
}

double concentration_profile(const SampledSpace& space, double delta,
                             std::uint64_t seed, std::size_t random_sets) {
  if (!(delta > 0.0))
    throw std::invalid_argument("concentration_profile: delta <= 0");
  const std::size_t m = space.size();

  double best = 1.0;
  auto consider = [&](const PointSet& candidate) {
    double mass = 0.0;
    for (std::size_t i : candidate) mass += space.weights[i];
    if (mass < 0.5) return;
    const std::vector<char> ball = ball_of_set(space, candidate, delta);
    best = std::min(best, mass_of(ball, space.weights));
  };

  // Sublevel sets of distance-to-point, grown until mass 1/2.
  for (std::size_t center = 0; center < m; ++center) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return space.dist(center, a) < space.dist(center, b);
                     });
    PointSet candidate;
    double mass = 0.0;
    for (std::size_t i : order) {
      candidate.push_back(i);
      mass += space.weights[i];
      if (mass >= 0.5) break;
    }
    consider(candidate);
  }

  // Seeded random half-mass subsets.
  RngStream rng(seed, "concentration_profile", 0);
  for (std::size_t t = 0; t < random_sets; ++t) {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = m; i > 1; --i)
      std::swap(order[i - 1], order[rng.next_below(i)]);
    PointSet candidate;
    double mass = 0.0;
    for (std::size_t i : order) {
      candidate.push_back(i);
      mass += space.weights[i];
      if (mass >= 0.5) break;
    }
    consider(candidate);
  }
  return 1.0 - best;
}

namespace {

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("pair space file: truncated");
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& v) {
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw std::runtime_error("pair space file: truncated");
}

}  // namespace

void save_pair_space(const SampledPairSpace& space, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write("RWPS", 4);
  const std::uint32_t version = 1;
  write_pod(out, version);
  std::ostringstream header;
  for (const auto& [key, value] : space.metadata)
    header << key << "=" << value << "\n";
  const std::string header_text = header.str();
  const std::uint64_t header_len = header_text.size();
  write_pod(out, header_len);
  out.write(header_text.data(), static_cast<std::streamsize>(header_len));
  const std::uint64_t m = space.size();
  write_pod(out, m);
  write_doubles(out, space.weights);
  write_doubles(out, space.dist1.raw());
  write_doubles(out, space.dist2.raw());
  if (!out) throw std::runtime_error("write failed: " + path);
}

SampledPairSpace load_pair_space(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RWPS", 4) != 0)
    throw std::runtime_error("pair space file: bad magic");
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != 1) throw std::runtime_error("pair space file: bad version");
  std::uint64_t header_len = 0;
  read_pod(in, header_len);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("pair space file: truncated header");
  std::uint64_t m = 0;
  read_pod(in, m);
  if (m == 0 || m > kMaxPoints)
    throw std::runtime_error("pair space file: bad point count");
  SampledPairSpace space;
  space.weights.resize(m);
  space.dist1 = DistanceMatrix(m);
  space.dist2 = DistanceMatrix(m);
  read_doubles(in, space.weights);
  read_doubles(in, space.dist1.raw());
  read_doubles(in, space.dist2.raw());
  std::istringstream header(header_text);
  std::string line;
  while (std::getline(header, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos)
      space.metadata[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return space;
}

}  // namespace rwrslab
