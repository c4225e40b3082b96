#include "rwrslab/cantorlab.hpp"

#include "rwrslab/infotools.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

constexpr double kTol = 1e-12;

int common_prefix(std::size_t a, std::size_t b, int depth) {
  const std::size_t x = a ^ b;
  int h = depth - 1;
  while (h >= 0 && !(x & (std::size_t{1} << h))) --h;
  // bits indexed from most significant coordinate: prefix length.
  return depth - 1 - h;
}

}  // namespace

double ScaleLadder::kappa(int r, int d) const {
  double k = 1.0;
  for (int i = r + 1; i <= d; ++i) k *= (1.0 - alpha(i));
  return k;
}

namespace {

ScaleLadder finish_ladder(std::vector<std::uint64_t> multipliers,
                          double budget) {
  ScaleLadder ladder;
  ladder.depth = static_cast<int>(multipliers.size());
  ladder.multipliers = std::move(multipliers);
  ladder.block_lengths.assign(static_cast<std::size_t>(ladder.depth) + 1, 1.0);
  ladder.alphas.resize(static_cast<std::size_t>(ladder.depth));
  for (int d = 1; d <= ladder.depth; ++d) {
    if (ladder.L(d) < 2)
      throw std::invalid_argument("ladder: multiplier below 2");
    ladder.block_lengths[static_cast<std::size_t>(d)] =
        ladder.block_lengths[static_cast<std::size_t>(d - 1)] *
        static_cast<double>(ladder.L(d));
    ladder.alphas[static_cast<std::size_t>(d - 1)] =
        1.0 / (static_cast<double>(d + 1) * static_cast<double>(d + 1));
  }
  if (ladder.N(ladder.depth) > budget)
    throw std::invalid_argument("ladder: N_depth exceeds simulation budget");
  return ladder;
}

}  // namespace

ScaleLadder make_ladder(int depth, double exponent, double budget) {
  if (depth < 1) throw std::invalid_argument("ladder: depth < 1");
  std::vector<std::uint64_t> multipliers(static_cast<std::size_t>(depth));
  for (int d = 1; d <= depth; ++d)
    multipliers[static_cast<std::size_t>(d - 1)] = static_cast<std::uint64_t>(
        std::ceil(std::pow(static_cast<double>(d + 1), exponent)));
  return finish_ladder(std::move(multipliers), budget);
}

ScaleLadder make_ladder_explicit(const std::vector<std::uint64_t>& multipliers,
                                 double budget) {
  if (multipliers.empty()) throw std::invalid_argument("ladder: empty");
  return finish_ladder(multipliers, budget);
}

bool DiscreteCantorSet::proper() const {
  std::set<double> seen(values.begin(), values.end());
  return seen.size() == values.size();
}

bool DiscreteCantorFamily::pairwise_disjoint() const {
  std::vector<std::pair<double, double>> sorted = intervals;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].first <= sorted[i - 1].second) return false;
  return true;
}

GapCheck check_gap_bounds(const DiscreteCantorSet& set,
                          const std::vector<double>& D) {
  const std::size_t n = set.values.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const int prefix = common_prefix(i, j, set.depth);
      if (std::abs(set.values[i] - set.values[j]) >
          D[static_cast<std::size_t>(prefix)] + kTol)
        return {false, i, j};
    }
  return {};
}

GapCheck check_gap_bounds(const DiscreteCantorFamily& family,
                          const std::vector<double>& D) {
  const std::size_t n = family.intervals.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const int prefix = common_prefix(i, j, family.depth);
      const double lo =
          std::min(family.intervals[i].first, family.intervals[j].first);
      const double hi =
          std::max(family.intervals[i].second, family.intervals[j].second);
      if (hi - lo > D[static_cast<std::size_t>(prefix)] + kTol)
        return {false, i, j};
    }
  return {};
}

GapCheck check_gap_bounds(const DiscreteCantorMatching& matching,
                          const std::vector<double>& D) {
  GapCheck fam = check_gap_bounds(matching.family, D);
  if (!fam.ok) return fam;
  return check_gap_bounds(matching.offsets, D);
}

double structure_distance(const DiscreteCantorSet& a,
                          const DiscreteCantorSet& b) {
  if (a.depth != b.depth)
    throw std::invalid_argument("structure_distance: depth mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

double structure_distance(const DiscreteCantorFamily& a,
                          const DiscreteCantorFamily& b) {
  if (a.depth != b.depth)
    throw std::invalid_argument("structure_distance: depth mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < a.intervals.size(); ++i) {
    d = std::max(d, std::abs(a.intervals[i].first - b.intervals[i].first));
    d = std::max(d, std::abs(a.intervals[i].second - b.intervals[i].second));
  }
  return d;
}

double structure_distance(const DiscreteCantorMatching& a,
                          const DiscreteCantorMatching& b) {
  return std::max(structure_distance(a.family, b.family),
                  structure_distance(a.offsets, b.offsets));
}

double covering_bound_formula(CantorKind kind, double L,
                              const std::vector<double>& D, double delta) {
  if (D.empty()) throw std::invalid_argument("covering bound: empty gaps");
  if (!(delta > 0.0) || delta > D.back() / 10.0 + kTol ||
      delta > L / 10.0 + kTol)
    throw std::invalid_argument(
        "covering bound: outside validity window (delta <= D_d/10, L/10)");
  // Factors (2L/d), (2D_1/d), (2D_2/d)^2, ..., (2D_d/d)^{2^{d-1}}.
  double log_product = std::log(2.0 * L / delta);
  double power = 1.0;
  for (std::size_t i = 0; i < D.size(); ++i) {
    log_product += power * std::log(2.0 * D[i] / delta);
    power = (i == 0) ? 2.0 : power * 2.0;
  }
  const double multiplier =
      kind == CantorKind::kSet ? 1.0 : (kind == CantorKind::kFamily ? 2.0 : 3.0);
  return std::exp(multiplier * log_product);
}

IntegerDcsCount enumerate_dcs_integer(long long k_lo, long long k_hi,
                                      const std::vector<long long>& D,
                                      int depth, bool collect) {
  if (depth < 1 || depth > 3)
    throw std::invalid_argument("enumerate_dcs_integer: depth must be 1..3");
  if (static_cast<int>(D.size()) != depth)
    throw std::invalid_argument("enumerate_dcs_integer: gap count mismatch");
  const long long width = k_hi - k_lo + 1;
  if (width <= 0) throw std::invalid_argument("enumerate_dcs_integer: empty K");
  const std::size_t leaves = std::size_t{1} << depth;
  double budget = 1.0;
  for (std::size_t i = 0; i < leaves; ++i) budget *= static_cast<double>(width);
  if (budget > 1e8)
    throw std::invalid_argument("enumerate_dcs_integer: budget exceeded");

  IntegerDcsCount out;
  std::vector<long long> tuple(leaves, 0);
  // DFS leaf by leaf; admissible range = intersection of the gap windows
  // around already-placed leaves.
  std::function<void(std::size_t)> dfs = [&](std::size_t leaf) {
    if (leaf == leaves) {
      ++out.count;
      if (collect) out.tuples.push_back(tuple);
      return;
    }
    long long lo = k_lo, hi = k_hi;
    for (std::size_t prev = 0; prev < leaf; ++prev) {
      const int prefix = common_prefix(prev, leaf, depth);
      const long long gap = D[static_cast<std::size_t>(prefix)];
      lo = std::max(lo, tuple[prev] - gap);
      hi = std::min(hi, tuple[prev] + gap);
    }
    for (long long v = lo; v <= hi; ++v) {
      tuple[leaf] = v;
      dfs(leaf + 1);
    }
  };
  dfs(0);
  return out;
}

bool is_meandering(const std::vector<double>& sigma, int M, double alpha,
                   double ell) {
  if (M < 1 || sigma.empty() || sigma.size() % static_cast<std::size_t>(M) != 0)
    throw std::invalid_argument("is_meandering: interval not divisible");
  const int L = static_cast<int>(sigma.size()) / M;
  const int need = static_cast<int>(std::ceil(alpha * L - 1e-12));
  if (need > L) return true;  // no subfamily is large enough

  // ell-fattened image hulls of the blocks.  Pairwise-close blocks share a
  // common point (Helly in one dimension), so a subfamily with no 2ell-
  // separated pair exists exactly when some point is covered by >= need
  // hulls.
  std::vector<std::pair<double, int>> events;
  events.reserve(static_cast<std::size_t>(2 * L));
  for (int b = 0; b < L; ++b) {
    double lo = sigma[static_cast<std::size_t>(b * M)];
    double hi = lo;
    for (int t = 1; t < M; ++t) {
      const double v = sigma[static_cast<std::size_t>(b * M + t)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    events.emplace_back(lo - ell, +1);
    events.emplace_back(hi + ell, -1);
  }
  std::sort(events.begin(), events.end(),
            [](const auto& a, const auto& b) {
              if (a.first != b.first) return a.first < b.first;
              return a.second > b.second;  // closed intervals: opens first
            });
  int stab = 0, max_stab = 0;
  for (const auto& [coord, delta] : events) {
    stab += delta;
    max_stab = std::max(max_stab, stab);
  }
  return max_stab < need;
}

MeanderFrequency meandering_frequency(const ProcessModel& process, int M,
                                      int L, double alpha, double ell,
                                      std::size_t samples, std::uint64_t seed) {
  const int window = L * M;
  const int pad = static_cast<int>(process.cocycle.range);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream rng(seed, "meandering", s);
    const std::vector<double> pi_cdf = cumulative(process.base.stationary);
    std::vector<std::vector<double>> fwd(process.base.alphabet);
    for (std::size_t i = 0; i < process.base.alphabet; ++i)
      fwd[i] = cumulative(process.base.transitions[i]);
    std::vector<int8_t> path(static_cast<std::size_t>(window + pad), 0);
    int current = rng.next_categorical(pi_cdf);
    path[0] = static_cast<int8_t>(current);
    for (std::size_t t = 1; t < path.size(); ++t) {
      current = rng.next_categorical(fwd[static_cast<std::size_t>(current)]);
      path[t] = static_cast<int8_t>(current);
    }
    std::vector<double> sigma(static_cast<std::size_t>(window), 0.0);
    double value = 0.0;
    for (int n = 0; n < window; ++n) {
      sigma[static_cast<std::size_t>(n)] = value;
      value += process.cocycle.value(path, n, process.base.alphabet);
    }
    if (is_meandering(sigma, M, alpha, ell)) ++hits;
  }
  MeanderFrequency out;
  out.value = static_cast<double>(hits) / static_cast<double>(samples);
  const double se = std::sqrt(
      std::max(out.value * (1.0 - out.value), 1e-12) /
      static_cast<double>(samples));
  out.ci_lo = std::max(0.0, out.value - 1.96 * se);
  out.ci_hi = std::min(1.0, out.value + 1.96 * se);
  return out;
}

namespace {

struct Hull {
  double lo = 0.0, hi = 0.0;
};

Hull image_hull(const RwrsSample& sample, long long from, long long to_excl) {
  Hull h;
  h.lo = sample.sum(static_cast<int>(from));
  h.hi = h.lo;
  for (long long n = from; n < to_excl; ++n) {
    const double v = sample.sum(static_cast<int>(n));
    h.lo = std::min(h.lo, v);
    h.hi = std::max(h.hi, v);
  }
  return h;
}

// Union of closed intervals kept sorted and merged.
struct IntervalUnion {
  std::vector<std::pair<double, double>> parts;

  void add(double lo, double hi) {
    parts.emplace_back(lo, hi);
    std::sort(parts.begin(), parts.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& p : parts) {
      if (!merged.empty() && p.first <= merged.back().second + kTol)
        merged.back().second = std::max(merged.back().second, p.second);
      else
        merged.push_back(p);
    }
    parts = std::move(merged);
  }

  double measure_within(double lo, double hi) const {
    double total = 0.0;
    for (const auto& p : parts)
      total += std::max(0.0, std::min(hi, p.second) - std::max(lo, p.first));
    return total;
  }

  // Complement within [lo, hi].
  std::vector<std::pair<double, double>> gaps(double lo, double hi) const {
    std::vector<std::pair<double, double>> out;
    double cursor = lo;
    for (const auto& p : parts) {
      if (p.second < lo) continue;
      if (p.first > hi) break;
      if (p.first > cursor) out.emplace_back(cursor, std::min(p.first, hi));
      cursor = std::max(cursor, p.second);
      if (cursor >= hi) break;
    }
    if (cursor < hi) out.emplace_back(cursor, hi);
    return out;
  }
};

double hat_cdf_local(double t) {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t <= 0.0) return 0.5 * (t + 1.0) * (t + 1.0);
  return 1.0 - 0.5 * (1.0 - t) * (1.0 - t);
}

// Mass that the ell-mollified occupation measure of the block assigns to a
// union of intervals.
double mollified_mass_on(const RwrsSample& sample, long long from,
                         long long to_excl, double ell,
                         const std::vector<std::pair<double, double>>& region) {
  const double w = 1.0 / static_cast<double>(to_excl - from);
  double mass = 0.0;
  for (long long n = from; n < to_excl; ++n) {
    const double v = sample.sum(static_cast<int>(n));
    for (const auto& [lo, hi] : region)
      mass += w * (hat_cdf_local((hi - v) / ell) - hat_cdf_local((lo - v) / ell));
  }
  return mass;
}

}  // namespace

GoodTimeSets good_time_sets(const RwrsSample& sample, const ScaleLadder& ladder,
                            const GoodTimeParams& params) {
  const int r = params.r, d = params.d;
  if (r < 0 || d <= r || d > ladder.depth)
    throw std::invalid_argument("good_time_sets: bad scales");
  const double nd = ladder.N(d);
  const double nr = ladder.N(r);
  if (nd > static_cast<double>(sample.N))
    throw std::invalid_argument("good_time_sets: window too short");
  const long long blocks = static_cast<long long>(nd / nr);
  const long long block_len = static_cast<long long>(nr);

  GoodTimeSets out;
  out.meander.assign(static_cast<std::size_t>(blocks), 1);
  out.spread.assign(static_cast<std::size_t>(blocks), 0);
  out.smooth.assign(static_cast<std::size_t>(blocks), 0);
  out.all.assign(static_cast<std::size_t>(blocks), 0);

  // Meandering flags per scale s cell, s = r+1 .. d.
  for (int s = r + 1; s <= d; ++s) {
    const long long ns = static_cast<long long>(ladder.N(s));
    const long long nprev = static_cast<long long>(ladder.N(s - 1));
    const long long cells = static_cast<long long>(nd) / ns;
    const int M = static_cast<int>(nprev);
    const double alpha =
        params.meander_alpha > 0.0 ? params.meander_alpha : ladder.alpha(s);
    for (long long c = 0; c < cells; ++c) {
      std::vector<double> sigma(static_cast<std::size_t>(ns));
      for (long long t = 0; t < ns; ++t)
        sigma[static_cast<std::size_t>(t)] =
            sample.sum(static_cast<int>(c * ns + t));
      const bool ok = is_meandering(sigma, M, alpha, params.ell);
      if (!ok) {
        const long long first_block = c * (ns / block_len);
        const long long last_block = (c + 1) * (ns / block_len);
        for (long long b = first_block; b < last_block; ++b)
          out.meander[static_cast<std::size_t>(b)] = 0;
      }
    }
  }

  for (long long b = 0; b < blocks; ++b) {
    const long long a = b * block_len;
    const long long e = a + block_len;
    const Hull h = image_hull(sample, a, e);
    const double spread = std::cbrt(static_cast<double>(block_len));
    const double anchor = sample.sum(static_cast<int>(a));
    out.spread[static_cast<std::size_t>(b)] =
        (anchor - spread >= h.lo - params.ell - kTol &&
         anchor + spread <= h.hi + params.ell + kTol)
            ? 1
            : 0;

    // Smoothness: mollified occupation vs uniform on the fattened image,
    // both discretized to exact cell masses on a common grid.
    const double lo = h.lo - params.ell;
    const double hi = h.hi + params.ell;
    const double step = params.ell / 8.0;
    const std::size_t cells = static_cast<std::size_t>(
        std::max(1.0, std::ceil((hi - lo) / step)));
    std::vector<std::pair<double, double>> atoms;
    const double w = 1.0 / static_cast<double>(block_len);
    for (long long n = a; n < e; ++n)
      atoms.emplace_back(sample.sum(static_cast<int>(n)), w);
    const std::vector<double> occ =
        mollified_cell_masses(atoms, params.ell, lo, step, cells);
    const std::vector<double> uni = uniform_cell_masses(lo, hi, lo, step, cells);
    const bool forward =
        approx_abs_continuity(occ, uni, params.smooth_M, params.smooth_eps)
            .holds;
    const bool backward =
        approx_abs_continuity(uni, occ, params.smooth_M, params.smooth_eps)
            .holds;
    out.smooth[static_cast<std::size_t>(b)] = (forward && backward) ? 1 : 0;
  }

  long long good = 0;
  for (long long b = 0; b < blocks; ++b) {
    out.all[static_cast<std::size_t>(b)] =
        out.meander[static_cast<std::size_t>(b)] &&
        out.spread[static_cast<std::size_t>(b)] &&
        out.smooth[static_cast<std::size_t>(b)];
    if (out.all[static_cast<std::size_t>(b)]) ++good;
  }
  out.combined_fraction =
      static_cast<double>(good * block_len) / nd;
  return out;
}

namespace {

struct FamilySearchContext {
  const RwrsSample* sample = nullptr;
  const ScaleLadder* ladder = nullptr;
  int r = 0;
  double ell = 0.0;
  int failed_scale = 0;
};

// Recursive clause of the adapted-family search: within the scale-s cell
// `cell`, split the available scale-r blocks by scale-(s-1) cells, keep the
// qualifying sub-cells, pick the lexicographically first 2ell-separated pair
// of sub-cell images, and recurse.
bool adapted_family_recurse(FamilySearchContext& ctx, int s, long long cell,
                            const std::vector<long long>& blocks,
                            std::vector<long long>& leaves) {
  const ScaleLadder& ladder = *ctx.ladder;
  const long long nprev = static_cast<long long>(ladder.N(s - 1));
  const long long nr = static_cast<long long>(ladder.N(ctx.r));

  if (s - 1 == ctx.r) {
    // Leaves: pick the first pair of blocks with separated fattened images.
    for (std::size_t i = 0; i < blocks.size(); ++i)
      for (std::size_t j = i + 1; j < blocks.size(); ++j) {
        const Hull hi_ = image_hull(*ctx.sample, blocks[i] * nr,
                                    (blocks[i] + 1) * nr);
        const Hull hj = image_hull(*ctx.sample, blocks[j] * nr,
                                   (blocks[j] + 1) * nr);
        const double dist = std::max(hj.lo - hi_.hi, hi_.lo - hj.hi);
        if (dist > 2.0 * ctx.ell) {
          leaves.push_back(blocks[i]);
          leaves.push_back(blocks[j]);
          return true;
        }
      }
    ctx.failed_scale = s;
    return false;
  }

  // Group blocks by their scale-(s-1) cell.
  std::map<long long, std::vector<long long>> groups;
  for (long long b : blocks) groups[(b * nr) / nprev].push_back(b);
  // Sub-cells qualify when they keep enough good blocks for the recursion.
  const double need =
      (1.0 - ladder.kappa(ctx.r, s - 1)) * ladder.N(s - 1) / ladder.N(ctx.r);
  std::vector<long long> qualifying;
  for (const auto& [sub, members] : groups)
    if (static_cast<double>(members.size()) >= need - kTol)
      qualifying.push_back(sub);

  for (std::size_t i = 0; i < qualifying.size(); ++i)
    for (std::size_t j = i + 1; j < qualifying.size(); ++j) {
      const Hull hi_ = image_hull(*ctx.sample, qualifying[i] * nprev,
                                  (qualifying[i] + 1) * nprev);
      const Hull hj = image_hull(*ctx.sample, qualifying[j] * nprev,
                                 (qualifying[j] + 1) * nprev);
      const double dist = std::max(hj.lo - hi_.hi, hi_.lo - hj.hi);
      if (!(dist > 2.0 * ctx.ell)) continue;
      std::vector<long long> left_leaves, right_leaves;
      if (adapted_family_recurse(ctx, s - 1, qualifying[i],
                                 groups[qualifying[i]], left_leaves) &&
          adapted_family_recurse(ctx, s - 1, qualifying[j],
                                 groups[qualifying[j]], right_leaves)) {
        leaves.insert(leaves.end(), left_leaves.begin(), left_leaves.end());
        leaves.insert(leaves.end(), right_leaves.begin(), right_leaves.end());
        return true;
      }
    }
  ctx.failed_scale = s;
  (void)cell;
  return false;
}

}  // namespace

AdaptedFamilySearch find_adapted_family(const std::vector<long long>& good_blocks,
                                        const RwrsSample& sample,
                                        const ScaleLadder& ladder, int r, int d,
                                        double ell) {
  AdaptedFamilySearch out;
  const double nr = ladder.N(r);
  const double nd = ladder.N(d);
  const double need = (1.0 - ladder.kappa(r, d)) * nd / nr;
  out.preconditions_met = static_cast<double>(good_blocks.size()) >= need - kTol;

  FamilySearchContext ctx;
  ctx.sample = &sample;
  ctx.ladder = &ladder;
  ctx.r = r;
  ctx.ell = ell;

  std::vector<long long> leaves;
  if (!adapted_family_recurse(ctx, d, 0, good_blocks, leaves)) {
    out.failed_scale = ctx.failed_scale;
    return out;
  }

  AdaptedFamily family;
  family.r = r;
  family.d = d;
  family.block_index = leaves;
  family.block_intervals.depth = d - r;
  family.image_intervals.depth = d - r;
  const long long block_len = static_cast<long long>(nr);
  for (long long b : leaves) {
    family.block_intervals.intervals.emplace_back(
        static_cast<double>(b * block_len),
        static_cast<double>((b + 1) * block_len - 1));
    const Hull h = image_hull(sample, b * block_len, (b + 1) * block_len);
    family.image_intervals.intervals.emplace_back(h.lo - ell, h.hi + ell);
  }
  if (!verify_adapted_family(family, sample, ladder, ell)) {
    out.failed_scale = d;
    return out;
  }
  out.success = true;
  out.family = std::move(family);
  return out;
}

bool verify_adapted_family(const AdaptedFamily& family,
                           const RwrsSample& sample, const ScaleLadder& ladder,
                           double ell) {
  const int r = family.r, d = family.d;
  const std::size_t leaves = family.block_index.size();
  if (leaves != (std::size_t{1} << (d - r))) return false;
  const long long nr = static_cast<long long>(ladder.N(r));

  // Adaptedness: same scale-(d-s) cell iff the indices agree on the first s
  // coordinates.
  for (std::size_t i = 0; i < leaves; ++i)
    for (std::size_t j = i + 1; j < leaves; ++j) {
      const int prefix = common_prefix(i, j, d - r);
      for (int s = 0; s <= d - r; ++s) {
        const long long cell_len = static_cast<long long>(ladder.N(d - s));
        const long long ci = (family.block_index[i] * nr) / cell_len;
        const long long cj = (family.block_index[j] * nr) / cell_len;
        const bool same = ci == cj;
        if (s <= prefix && !same) return false;
        if (s > prefix && same) return false;
      }
    }

  // Pairwise-disjoint fattened images.
  for (std::size_t i = 0; i < leaves; ++i)
    for (std::size_t j = i + 1; j < leaves; ++j) {
      const Hull hi_ = image_hull(sample, family.block_index[i] * nr,
                                  (family.block_index[i] + 1) * nr);
      const Hull hj = image_hull(sample, family.block_index[j] * nr,
                                 (family.block_index[j] + 1) * nr);
      const double dist = std::max(hj.lo - hi_.hi, hi_.lo - hj.hi);
      if (!(dist > 2.0 * ell)) return false;
    }

  // Declared gap bounds hold for both interval families.
  std::vector<double> gaps;
  for (int s = 0; s < d - r; ++s) gaps.push_back(ladder.N(d - s));
  if (!check_gap_bounds(family.block_intervals, gaps).ok) return false;
  std::vector<double> image_gaps;
  for (double g : gaps) image_gaps.push_back(4.0 * ell * g);
  if (!check_gap_bounds(family.image_intervals, image_gaps).ok) return false;
  return family.image_intervals.pairwise_disjoint();
}

FamilyCover cover_with_families(const RwrsSample& sample,
                                const std::vector<long long>& good_blocks,
                                const ScaleLadder& ladder,
                                const CoverParams& params) {
  FamilyCover out;
  const int r = params.r, d = params.d;
  const double nd = ladder.N(d);
  const double nr = ladder.N(r);
  const long long block_len = static_cast<long long>(nr);
  out.spread_scale = std::cbrt(nr);

  const Hull range = image_hull(sample, 0, static_cast<long long>(nd));
  const double range_lo = range.lo - params.ell;
  const double range_hi = range.hi + params.ell;
  out.range_length = range_hi - range_lo;

  const double need = (1.0 - ladder.kappa(r, d)) * nd / nr;
  out.preconditions_met = static_cast<double>(good_blocks.size()) >= need - kTol;

  IntervalUnion covered;
  std::vector<long long> current = good_blocks;
  for (int round = 0; round < params.max_families; ++round) {
    out.residual = out.range_length - covered.measure_within(range_lo, range_hi);
    if (out.residual <= params.eta * out.range_length + kTol) {
      out.success = true;
      break;
    }
    // Blocks whose mollified occupation measure charges the uncovered part.
    const std::vector<std::pair<double, double>> uncovered =
        covered.gaps(range_lo, range_hi);
    const double threshold = params.eta / (8.0 * params.smooth_M);
    std::vector<long long> charged;
    for (long long b : current) {
      const double mass = mollified_mass_on(sample, b * block_len,
                                            (b + 1) * block_len, params.ell,
                                            uncovered);
      if (mass > threshold) charged.push_back(b);
    }
    if (charged.empty()) {
      out.stall = true;
      break;
    }
    const AdaptedFamilySearch search =
        find_adapted_family(charged, sample, ladder, r, d, params.ell);
    if (!search.success) {
      out.stall = true;
      break;
    }
    const double before = covered.measure_within(range_lo, range_hi);
    for (const auto& [lo, hi] : search.family.image_intervals.intervals)
      covered.add(lo, hi);
    if (covered.measure_within(range_lo, range_hi) <= before + kTol) {
      out.stall = true;  // the search keeps returning an already-covered family
      break;
    }
    out.families.push_back(search.family);
  }
  out.residual = out.range_length - covered.measure_within(range_lo, range_hi);
  if (out.residual <= params.eta * out.range_length + kTol) out.success = true;

  double image_total = 0.0;
  for (const auto& family : out.families)
    for (const auto& [lo, hi] : family.image_intervals.intervals)
      image_total += hi - lo;
  out.efficiency =
      out.range_length > 0.0 ? image_total / out.range_length : 0.0;
  return out;
}

bool verify_family_cover(const FamilyCover& cover, const RwrsSample& sample,
                         const ScaleLadder& ladder, const CoverParams& params) {
  const long long block_len = static_cast<long long>(ladder.N(params.r));
  IntervalUnion covered;
  for (const auto& family : cover.families) {
    if (!verify_adapted_family(family, sample, ladder, params.ell)) return false;
    // Property 1: images are not too short around the block anchor.
    for (std::size_t w = 0; w < family.block_index.size(); ++w) {
      const long long a = family.block_index[w] * block_len;
      const double anchor = sample.sum(static_cast<int>(a));
      const auto& [lo, hi] = family.image_intervals.intervals[w];
      if (anchor - cover.spread_scale < lo - kTol ||
          anchor + cover.spread_scale > hi + kTol)
        return false;
      covered.add(lo, hi);
    }
  }
  const Hull range = image_hull(
      sample, 0, static_cast<long long>(ladder.N(params.d)));
  const double range_lo = range.lo - params.ell;
  const double range_hi = range.hi + params.ell;
  const double range_len = range_hi - range_lo;
  const double residual = range_len - covered.measure_within(range_lo, range_hi);
  if (cover.success && residual > params.eta * range_len + 1e-9) return false;
  return true;
}

MatchingExtraction extract_matchings(const RwrsSample& sample_a,
                                     const RwrsSample& sample_b,
                                     const ProcessModel& process,
                                     const ScaleLadder& ladder,
                                     const MatchingParams& params) {
  MatchingExtraction out;
  const int r = params.r, d = params.d;
  const double nd = ladder.N(d);
  const long long nd_ll = static_cast<long long>(nd);
  const long long block_len = static_cast<long long>(ladder.N(r));

  const double closeness =
      skew_distance(sample_a, sample_b, 0, static_cast<int>(nd_ll),
                    DynamicMode::kSum, process.metric);
  out.preconditions_met = closeness <= params.delta * nd + kTol;

  // Agreement set P: base symbols close in the cylinder metric and scenery
  // cells in exact agreement at the two walkers.
  std::vector<char> agree(static_cast<std::size_t>(nd_ll), 0);
  long long agree_count = 0;
  for (long long n = 0; n < nd_ll; ++n) {
    double base = 0.0;
    for (int k = -process.metric.p; k <= process.metric.p; ++k)
      if (sample_a.symbol(static_cast<int>(n) + k) !=
          sample_b.symbol(static_cast<int>(n) + k))
        base += std::pow(2.0, -std::abs(k));
    bool fibre_ok = true;
    const std::int64_t sa =
        scenery_site(sample_a.sum(static_cast<int>(n)), sample_a.cell_width);
    const std::int64_t sb =
        scenery_site(sample_b.sum(static_cast<int>(n)), sample_b.cell_width);
    for (int j = -process.metric.rho; j <= process.metric.rho && fibre_ok; ++j)
      if (sample_a.colour_at_site(sa + j) != sample_b.colour_at_site(sb + j))
        fibre_ok = false;
    if (base <= params.tilde_delta && fibre_ok) {
      agree[static_cast<std::size_t>(n)] = 1;
      ++agree_count;
    }
  }
  out.agreement_fraction = static_cast<double>(agree_count) / nd;
  if (agree_count == 0) return out;

  // Good blocks: wholly inside P and in the triple good-time intersection.
  GoodTimeParams gt;
  gt.r = r;
  gt.d = d;
  gt.ell = params.ell;
  gt.smooth_M = params.smooth_M;
  gt.smooth_eps = params.smooth_eps;
  gt.meander_alpha = params.meander_alpha;
  const GoodTimeSets sets = good_time_sets(sample_a, ladder, gt);
  std::vector<long long> good;
  const long long blocks = nd_ll / block_len;
  for (long long b = 0; b < blocks; ++b) {
    if (!sets.all[static_cast<std::size_t>(b)]) continue;
    bool inside = true;
    for (long long t = b * block_len; t < (b + 1) * block_len && inside; ++t)
      if (!agree[static_cast<std::size_t>(t)]) inside = false;
    if (inside) good.push_back(b);
  }
  if (good.empty()) return out;

  CoverParams cp;
  cp.r = r;
  cp.d = d;
  cp.ell = params.ell;
  cp.eta = params.eta;
  cp.smooth_M = params.smooth_M;
  cp.smooth_eps = params.smooth_eps;
  out.cover = cover_with_families(sample_a, good, ladder, cp);
  out.success = out.cover.success;

  // Matchings: fattened images with scenery offsets.
  const double two_eta_sqrt = 2.0 * params.eta * std::sqrt(nd);
  bool p1 = true, p3 = true;
  for (const auto& family : out.cover.families) {
    DiscreteCantorMatching matching;
    matching.family = family.image_intervals;
    matching.offsets.depth = d - r;
    for (std::size_t w = 0; w < family.block_index.size(); ++w) {
      const long long a0 = family.block_index[w] * block_len;
      const double u = sample_b.sum(static_cast<int>(a0)) -
                       sample_a.sum(static_cast<int>(a0));
      matching.offsets.values.push_back(u);
      if (!(std::abs(u) < two_eta_sqrt)) p1 = false;
      // P3: scenery agreement along the matched interval.
      const auto& [lo, hi] = family.image_intervals.intervals[w];
      const std::int64_t s_lo = scenery_site(lo, sample_a.cell_width);
      const std::int64_t s_hi = scenery_site(hi, sample_a.cell_width);
      for (std::int64_t s = s_lo; s <= s_hi; ++s) {
        const double z = static_cast<double>(s) * sample_a.cell_width;
        const std::int64_t t_site = scenery_site(z + u, sample_b.cell_width);
        if (sample_a.colour_at_site(s) != sample_b.colour_at_site(t_site)) {
          p3 = false;
          break;
        }
      }
    }
    out.matchings.push_back(std::move(matching));
  }
  out.p1_ok = p1 && !out.matchings.empty();
  out.p3_ok = p3 && !out.matchings.empty();
  out.p2_ok = out.cover.residual <=
              params.eta * out.cover.range_length + 4.0 * params.eta *
                  std::sqrt(nd) + kTol;
  return out;
}

std::string cantor_to_json(const DiscreteCantorMatching& matching,
                           const std::string& provenance) {
  std::ostringstream out;
  out << "{\"depth\":" << matching.family.depth << ",\"intervals\":[";
  for (std::size_t i = 0; i < matching.family.intervals.size(); ++i) {
    if (i) out << ",";
    out << "[" << matching.family.intervals[i].first << ","
        << matching.family.intervals[i].second << "]";
  }
  out << "],\"offsets\":[";
  for (std::size_t i = 0; i < matching.offsets.values.size(); ++i) {
    if (i) out << ",";
    out << matching.offsets.values[i];
  }
  out << "],\"provenance\":\"" << provenance << "\"}";
  return out.str();
}

}  // namespace rwrslab
