#include "rwrslab/procgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

constexpr double kRowSumTol = 1e-9;
constexpr double kStationaryTol = 1e-12;

std::vector<double> power_iterate(
    const std::vector<std::vector<double>>& transitions) {
  const std::size_t k = transitions.size();
  std::vector<double> pi(k, 1.0 / static_cast<double>(k));
  std::vector<double> next(k, 0.0);
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) next[j] += pi[i] * transitions[i][j];
    double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& x : next) x /= total;
    double diff = 0.0;
    for (std::size_t j = 0; j < k; ++j) diff += std::abs(next[j] - pi[j]);
    pi.swap(next);
    if (diff < kStationaryTol) break;
  }
  return pi;
}

bool is_primitive(const std::vector<std::vector<double>>& transitions) {
  const std::size_t k = transitions.size();
  std::vector<std::vector<char>> reach(k, std::vector<char>(k, 0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      reach[i][j] = transitions[i][j] > 0.0 ? 1 : 0;
  // Wielandt bound: primitive iff some power up to k^2 - 2k + 2 is positive.
  const std::size_t limit = k * k - 2 * k + 2;
  auto all_positive = [&](const std::vector<std::vector<char>>& b) {
    for (const auto& row : b)
      for (char c : row)
        if (!c) return false;
    return true;
  };
  std::vector<std::vector<char>> power = reach;
  for (std::size_t n = 1; n <= std::max<std::size_t>(limit, 1); ++n) {
    if (all_positive(power)) return true;
    std::vector<std::vector<char>> next(k, std::vector<char>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        if (!power[i][l]) continue;
        for (std::size_t j = 0; j < k; ++j)
          if (reach[l][j]) next[i][j] = 1;
      }
    power.swap(next);
  }
  return all_positive(power);
}

}  // namespace

MarkovSystem build_markov_system(
    const std::vector<std::vector<double>>& transitions) {
  const std::size_t k = transitions.size();
  if (k == 0) throw std::invalid_argument("markov: empty alphabet");
  for (const auto& row : transitions) {
    if (row.size() != k) throw std::invalid_argument("markov: not square");
    double total = 0.0;
    for (double x : row) {
      if (!(x >= 0.0)) throw std::invalid_argument("markov: negative entry");
      total += x;
    }
    if (std::abs(total - 1.0) > kRowSumTol)
      throw std::invalid_argument("markov: row does not sum to 1");
  }
  if (k > 1 && !is_primitive(transitions))
    throw std::invalid_argument(
        "markov: chain is reducible or periodic (no positive power)");
  MarkovSystem system;
  system.alphabet = k;
  system.transitions = transitions;
  system.stationary = power_iterate(transitions);
  // Fixed-point check.
  std::vector<double> image(k, 0.0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      image[j] += system.stationary[i] * transitions[i][j];
  for (std::size_t j = 0; j < k; ++j)
    if (std::abs(image[j] - system.stationary[j]) > 1e-8)
      throw std::invalid_argument("markov: stationary vector did not converge");
  return system;
}

MarkovSystem iid_uniform_system(std::size_t k) {
  std::vector<std::vector<double>> rows(
      k, std::vector<double>(k, 1.0 / static_cast<double>(k)));
  return build_markov_system(rows);
}

double markov_entropy_rate(const MarkovSystem& system) {
  double rate = 0.0;
  for (std::size_t i = 0; i < system.alphabet; ++i) {
    double row_entropy = 0.0;
    for (double p : system.transitions[i])
      if (p > 0.0) row_entropy -= p * std::log(p);
    rate += system.stationary[i] * row_entropy;
  }
  return rate;
}

double block_probability(const MarkovSystem& system,
                         const std::vector<int>& block) {
  if (block.empty()) return 1.0;
  double p = system.stationary[static_cast<std::size_t>(block[0])];
  for (std::size_t i = 1; i < block.size(); ++i)
    p *= system.transition(static_cast<std::size_t>(block[i - 1]),
                           static_cast<std::size_t>(block[i]));
  return p;
}

double FiniteRangeCocycle::sup_norm() const {
  double s = 0.0;
  for (double v : table) s = std::max(s, std::abs(v));
  return s;
}

void validate_cocycle(const MarkovSystem& system,
                      const FiniteRangeCocycle& cocycle) {
  if (cocycle.range < 1) throw std::invalid_argument("cocycle: range < 1");
  std::size_t expected = 1;
  for (std::size_t i = 0; i < cocycle.range; ++i) expected *= system.alphabet;
  if (cocycle.table.size() != expected)
    throw std::invalid_argument("cocycle: table size mismatch");
  // Stationary mean over r-blocks.
  double mean = 0.0;
  std::vector<int> block(cocycle.range, 0);
  for (std::size_t idx = 0; idx < expected; ++idx) {
    std::size_t rem = idx;
    for (std::size_t i = cocycle.range; i-- > 0;) {
      block[i] = static_cast<int>(rem % system.alphabet);
      rem /= system.alphabet;
    }
    mean += block_probability(system, block) * cocycle.table[idx];
  }
  if (std::abs(mean) > 1e-8)
    throw std::invalid_argument("cocycle: stationary mean is not zero");
}

FiniteRangeCocycle srw_cocycle() {
  FiniteRangeCocycle cocycle;
  cocycle.range = 1;
  cocycle.table = {-1.0, 1.0};
  cocycle.declared_mean = 0.0;
  cocycle.declared_variance = 1.0;
  return cocycle;
}

double SceneryModel::entropy() const {
  if (trivial()) return 0.0;
  if (kind == SceneryKind::kIid) {
    double h = 0.0;
    for (double p : probs)
      if (p > 0.0) h -= p * std::log(p);
    return h;
  }
  return markov_entropy_rate(build_markov_system(transitions));
}

ProcessModel srw_process(std::size_t scenery_alphabet) {
  ProcessModel process;
  process.base = iid_uniform_system(2);
  process.cocycle = srw_cocycle();
  process.scenery.kind = SceneryKind::kIid;
  process.scenery.alphabet = scenery_alphabet;
  process.scenery.probs.assign(
      std::max<std::size_t>(scenery_alphabet, 1),
      1.0 / static_cast<double>(std::max<std::size_t>(scenery_alphabet, 1)));
  process.scenery.cell_width = 1.0;
  process.name =
      scenery_alphabet <= 1 ? "srw-trivial" : "srw-iid" + std::to_string(scenery_alphabet);
  return process;
}

namespace {

// Two-sided stationary path over [-before; after], returned with index
// offset `before`.
std::vector<int8_t> two_sided_path(const MarkovSystem& system, int before,
                                   int after, RngStream& rng) {
  const std::size_t k = system.alphabet;
  std::vector<std::vector<double>> fwd_cdf(k), bwd_cdf(k);
  for (std::size_t i = 0; i < k; ++i) fwd_cdf[i] = cumulative(system.transitions[i]);
  // Reversed chain: P*_{ij} = pi_j P_{ji} / pi_i.
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> row(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
      row[j] = system.stationary[j] * system.transition(j, i) /
               system.stationary[i];
    bwd_cdf[i] = cumulative(row);
  }
  const std::vector<double> pi_cdf = cumulative(system.stationary);

  std::vector<int8_t> path(static_cast<std::size_t>(before + after + 1), 0);
  const int origin = before;
  int current = rng.next_categorical(pi_cdf);
  path[static_cast<std::size_t>(origin)] = static_cast<int8_t>(current);
  for (int t = 1; t <= after; ++t) {
    current = rng.next_categorical(fwd_cdf[static_cast<std::size_t>(current)]);
    path[static_cast<std::size_t>(origin + t)] = static_cast<int8_t>(current);
  }
  current = path[static_cast<std::size_t>(origin)];
  for (int t = 1; t <= before; ++t) {
    current = rng.next_categorical(bwd_cdf[static_cast<std::size_t>(current)]);
    path[static_cast<std::size_t>(origin - t)] = static_cast<int8_t>(current);
  }
  return path;
}

}  // namespace

std::vector<std::vector<int>> sample_paths(const MarkovSystem& system, int N,
                                           std::size_t count,
                                           std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_paths: N < 1");
  std::vector<std::vector<int>> out(count);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng(seed, "sample_paths", s);
    const std::vector<int8_t> path = two_sided_path(system, N, N, rng);
    std::vector<int> window(static_cast<std::size_t>(2 * N));
    for (int t = -N; t < N; ++t)
      window[static_cast<std::size_t>(t + N)] =
          path[static_cast<std::size_t>(t + N)];
    out[s] = std::move(window);
  }
  return out;
}

std::vector<double> cocycle_sums(const std::vector<int8_t>& path, int N,
                                 int pad, const FiniteRangeCocycle& cocycle,
                                 std::size_t alphabet) {
  const int r = static_cast<int>(cocycle.range);
  if (pad < r - 1)
    throw std::invalid_argument("cocycle_sums: window too short for range");
  if (path.size() != static_cast<std::size_t>(2 * (N + pad) + 1))
    throw std::invalid_argument("cocycle_sums: path length mismatch");
  const int offset = N + pad;
  auto step = [&](int n) {
    return cocycle.value(path, n + offset, alphabet);
  };
  std::vector<double> sums(static_cast<std::size_t>(2 * N + 1), 0.0);
  for (int n = 0; n < N; ++n)
    sums[static_cast<std::size_t>(N + n + 1)] =
        sums[static_cast<std::size_t>(N + n)] + step(n);
  for (int n = -1; n >= -N; --n)
    sums[static_cast<std::size_t>(N + n)] =
        sums[static_cast<std::size_t>(N + n + 1)] - step(n);
  return sums;
}

std::vector<double> cocycle_sums(const std::vector<int>& path, int N, int pad,
                                 const FiniteRangeCocycle& cocycle,
                                 std::size_t alphabet) {
  std::vector<int8_t> narrow(path.size());
  for (std::size_t i = 0; i < path.size(); ++i)
    narrow[i] = static_cast<int8_t>(path[i]);
  return cocycle_sums(narrow, N, pad, cocycle, alphabet);
}

std::int64_t scenery_site(double t, double cell_width) {
  return static_cast<std::int64_t>(std::nearbyint(t / cell_width));
}

int RwrsSample::colour_at_site(std::int64_t site) const {
  const std::int64_t idx = site - site_lo;
  if (idx < 0 || idx >= static_cast<std::int64_t>(scenery.size()))
    throw std::out_of_range("scenery window insufficient");
  return scenery[static_cast<std::size_t>(idx)];
}

void RwrsSample::validate(const ProcessModel& process) const {
  if (std::abs(sum(0)) > 0.0)
    throw std::logic_error("rwrs sample: sigma_0 != 0");
  for (int n = -N; n < N; ++n) {
    const double inc =
        process.cocycle.value(path, n + N + pad, process.base.alphabet);
    if (std::abs(sum(n + 1) - sum(n) - inc) > 1e-9)
      throw std::logic_error("rwrs sample: inconsistent partial sums");
  }
  const double ell = std::max(process.cocycle.sup_norm(), 1.0);
  double lo = 0.0, hi = 0.0;
  for (int n = -N; n <= N; ++n) {
    lo = std::min(lo, sum(n));
    hi = std::max(hi, sum(n));
  }
  const std::int64_t lo_site = scenery_site(lo - ell, cell_width);
  const std::int64_t hi_site = scenery_site(hi + ell, cell_width);
  if (lo_site < site_lo ||
      hi_site >= site_lo + static_cast<std::int64_t>(scenery.size()))
    throw std::logic_error("rwrs sample: scenery window too small");
}

RwrsSample sample_rwrs(const ProcessModel& process, int N, std::uint64_t seed,
                       std::uint64_t index, int extra_sites) {
  if (N < 1) throw std::invalid_argument("sample_rwrs: N < 1");
  RwrsSample sample;
  sample.N = N;
  sample.pad =
      std::max(process.metric.p, static_cast<int>(process.cocycle.range));
  sample.cell_width = process.scenery.cell_width;

  RngStream rng(seed, "rwrs", index);
  sample.path = two_sided_path(process.base, N + sample.pad, N + sample.pad, rng);
  sample.sums = cocycle_sums(sample.path, N, sample.pad, process.cocycle,
                             process.base.alphabet);

  const double ell = std::max(process.cocycle.sup_norm(), 1.0);
  double lo = 0.0, hi = 0.0;
  for (double s : sample.sums) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const int margin = process.metric.rho + extra_sites +
                     static_cast<int>(std::ceil((ell + 1.0) / sample.cell_width));
  sample.site_lo = scenery_site(lo, sample.cell_width) - margin;
  const std::int64_t site_hi = scenery_site(hi, sample.cell_width) + margin;
  const std::size_t cells = static_cast<std::size_t>(site_hi - sample.site_lo + 1);

  if (process.scenery.trivial()) {
    sample.scenery.assign(cells, 0);
  } else if (process.scenery.kind == SceneryKind::kIid) {
    const std::vector<double> cdf = cumulative(process.scenery.probs);
    sample.scenery.resize(cells);
    for (std::size_t c = 0; c < cells; ++c)
      sample.scenery[c] = static_cast<int8_t>(rng.next_categorical(cdf));
  } else {
    const MarkovSystem chain = build_markov_system(process.scenery.transitions);
    const int half = static_cast<int>(cells / 2);
    const std::vector<int8_t> line =
        two_sided_path(chain, half, static_cast<int>(cells) - half - 1, rng);
    sample.scenery = line;
  }
  return sample;
}

std::vector<std::pair<int, int>> rwrs_name(const RwrsSample& sample, int N) {
  if (N > sample.N) throw std::invalid_argument("rwrs_name: window too large");
  std::vector<std::pair<int, int>> name;
  name.reserve(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    const std::int64_t site = scenery_site(sample.sum(n), sample.cell_width);
    name.emplace_back(sample.symbol(n), sample.colour_at_site(site));
  }
  return name;
}

namespace {

double base_step_distance(const RwrsSample& a, const RwrsSample& b, int n,
                          int p) {
  double d = 0.0;
  for (int k = -p; k <= p; ++k)
    if (a.symbol(n + k) != b.symbol(n + k))
      d += std::pow(2.0, -std::abs(k));
  return d;
}

int fibre_step_distance(const RwrsSample& a, const RwrsSample& b, int n,
                        int rho) {
  const std::int64_t sa = scenery_site(a.sum(n), a.cell_width);
  const std::int64_t sb = scenery_site(b.sum(n), b.cell_width);
  for (int j = -rho; j <= rho; ++j)
    if (a.colour_at_site(sa + j) != b.colour_at_site(sb + j)) return 1;
  return 0;
}

}  // namespace

double skew_distance(const RwrsSample& a, const RwrsSample& b, int lo, int hi,
                     DynamicMode mode, const MetricConfig& metric) {
  if (a.N != b.N || lo < -a.N || hi > a.N)
    throw std::invalid_argument("skew_distance: window mismatch");
  double acc = 0.0;
  for (int n = lo; n < hi; ++n) {
    const double d = base_step_distance(a, b, n, metric.p) +
                     fibre_step_distance(a, b, n, metric.rho);
    if (mode == DynamicMode::kSum)
      acc += d;
    else
      acc = std::max(acc, d);
  }
  return acc;
}

OccupationMeasure occupation_measure(const std::vector<double>& sums, int N,
                                     int lo, int hi, double bandwidth,
                                     double grid_step) {
  if (lo >= hi) throw std::invalid_argument("occupation_measure: empty window");
  if (lo < -N || hi > N + 1)
    throw std::invalid_argument("occupation_measure: window out of range");
  OccupationMeasure out;
  std::map<double, double> atom_map;
  const double weight = 1.0 / static_cast<double>(hi - lo);
  for (int n = lo; n < hi; ++n)
    atom_map[sums[static_cast<std::size_t>(n + N)]] += weight;
  out.atoms.assign(atom_map.begin(), atom_map.end());

  if (bandwidth > 0.0) {
    const double h = bandwidth;
    const double step = grid_step > 0.0 ? grid_step : h / 32.0;
    const double lo_v = out.atoms.front().first - h;
    const double hi_v = out.atoms.back().first + h;
    const std::size_t cells =
        static_cast<std::size_t>(std::ceil((hi_v - lo_v) / step)) + 1;
    out.grid_start = lo_v;
    out.grid_step = step;
    out.density.assign(cells + 1, 0.0);
    for (const auto& [v, w] : out.atoms) {
      for (std::size_t g = 0; g <= cells; ++g) {
        const double u = lo_v + static_cast<double>(g) * step - v;
        if (std::abs(u) < h)
          out.density[g] += w * (1.0 - std::abs(u) / h) / h;
      }
    }
  }
  return out;
}

double OccupationMeasure::total_smoothed_mass() const {
  if (density.empty()) return 0.0;
  double mass = 0.0;
  for (std::size_t g = 0; g + 1 < density.size(); ++g)
    mass += 0.5 * (density[g] + density[g + 1]) * grid_step;
  return mass;
}

namespace {

// CDF of the triangular bump of half-width 1 centered at 0.
double hat_cdf(double t) {
  if (t <= -1.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (t <= 0.0) return 0.5 * (t + 1.0) * (t + 1.0);
  return 1.0 - 0.5 * (1.0 - t) * (1.0 - t);
}

}  // namespace

std::vector<double> mollified_cell_masses(
    const std::vector<std::pair<double, double>>& atoms, double half_width,
    double start, double step, std::size_t cells) {
  std::vector<double> masses(cells, 0.0);
  for (const auto& [v, w] : atoms) {
    const double lo = std::max(start, v - half_width);
    const double hi = v + half_width;
    std::size_t g0 = 0, g1 = cells;
    if (lo > start)
      g0 = std::min(cells, static_cast<std::size_t>((lo - start) / step));
    if (hi < start + static_cast<double>(cells) * step)
      g1 = std::min(cells,
                    static_cast<std::size_t>((hi - start) / step) + 1);
    for (std::size_t g = g0; g < g1; ++g) {
      const double a = (start + static_cast<double>(g) * step - v) / half_width;
      const double b = a + step / half_width;
      masses[g] += w * (hat_cdf(b) - hat_cdf(a));
    }
  }
  return masses;
}

std::vector<double> uniform_cell_masses(double a, double b, double start,
                                        double step, std::size_t cells) {
  std::vector<double> masses(cells, 0.0);
  if (!(b > a)) return masses;
  for (std::size_t g = 0; g < cells; ++g) {
    const double lo = std::max(a, start + static_cast<double>(g) * step);
    const double hi = std::min(b, start + static_cast<double>(g + 1) * step);
    if (hi > lo) masses[g] = (hi - lo) / (b - a);
  }
  return masses;
}

std::vector<double> traj_rescale(const std::vector<double>& sums, int N,
                                 int window_N, TrajDirection direction) {
  if (N < 1 || N > window_N)
    throw std::invalid_argument("traj_rescale: insufficient window");
  std::vector<double> values(static_cast<std::size_t>(N + 1), 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int i = 0; i <= N; ++i) {
    const int n = direction == TrajDirection::kForward ? i : -i;
    values[static_cast<std::size_t>(i)] =
        sums[static_cast<std::size_t>(n + window_N)] * scale;
  }
  return values;
}

VarianceEstimate effective_variance(const ProcessModel& process, int N,
                                    std::size_t samples, std::uint64_t seed) {
  std::vector<double> endpoints(samples, 0.0);
  const int pad = static_cast<int>(process.cocycle.range);
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream rng(seed, "effective_variance", s);
    const std::vector<int8_t> path =
        two_sided_path(process.base, N + pad, N + pad, rng);
    const std::vector<double> sums =
        cocycle_sums(path, N, pad, process.cocycle, process.base.alphabet);
    endpoints[s] = sums[static_cast<std::size_t>(2 * N)];
  }
  auto variance_of = [&](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return var / static_cast<double>(xs.size());
  };
  VarianceEstimate est;
  est.value = variance_of(endpoints) / static_cast<double>(N);

  RngStream boot(seed, "effective_variance_boot", 0);
  const int B = 200;
  std::vector<double> stats(B, 0.0);
  std::vector<double> resample(samples, 0.0);
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < samples; ++i)
      resample[i] = endpoints[boot.next_below(samples)];
    stats[static_cast<std::size_t>(b)] =
        variance_of(resample) / static_cast<double>(N);
  }
  std::sort(stats.begin(), stats.end());
  est.ci_lo = stats[static_cast<std::size_t>(0.025 * B)];
  est.ci_hi = stats[static_cast<std::size_t>(0.975 * B) - 1];
  return est;
}

std::vector<RwrsSample> sample_rwrs_batch(const ProcessModel& process, int N,
                                          std::size_t m, std::uint64_t seed,
                                          int extra_sites) {
  std::vector<RwrsSample> samples(m);
  for (std::size_t i = 0; i < m; ++i)
    samples[i] = sample_rwrs(process, N, seed, i, extra_sites);
  return samples;
}

SampledPairSpace pair_space_from_samples(const std::vector<RwrsSample>& samples,
                                         const ProcessModel& process, int N,
                                         int workers) {
  const std::size_t m = samples.size();
  if (m == 0) throw std::invalid_argument("pair_space: no samples");
  if (m > kMaxPoints) throw std::invalid_argument("pair_space: cap exceeded");

  SampledPairSpace space;
  space.weights.assign(m, 1.0 / static_cast<double>(m));
  space.dist1 = DistanceMatrix(m);
  space.dist2 = DistanceMatrix(m);

  const int p = process.metric.p;
  const int rho = process.metric.rho;

  // Prefix sums of the 2-adic kernel: prefix[s + p + 1] = sum_{k=-p..s} 2^-|k|.
  std::vector<double> prefix(static_cast<std::size_t>(2 * p + 2), 0.0);
  for (int s = -p; s <= p; ++s)
    prefix[static_cast<std::size_t>(s + p + 1)] =
        prefix[static_cast<std::size_t>(s + p)] + std::pow(2.0, -std::abs(s));
  auto kernel_weight = [&](int t, int lo, int hi) {
    // sum of 2^-|k| over k in [-p, p] with t - k in [lo, hi).
    const int top = std::min(p, t - lo);
    const int bot = std::min(p, t - hi);  // exclude k <= t - hi
    const double hi_val =
        top < -p ? 0.0 : prefix[static_cast<std::size_t>(top + p + 1)];
    const double lo_val =
        bot < -p ? 0.0 : prefix[static_cast<std::size_t>(bot + p + 1)];
    return hi_val - lo_val;
  };

  auto pair_distance = [&](const RwrsSample& a, const RwrsSample& b, int lo,
                           int hi) {
    double base = 0.0;
    for (int t = lo - p; t <= hi - 1 + p; ++t)
      if (a.symbol(t) != b.symbol(t)) base += kernel_weight(t, lo, hi);
    double fibre = 0.0;
    if (!process.scenery.trivial())
      for (int n = lo; n < hi; ++n)
        fibre += fibre_step_distance(a, b, n, rho);
    return base + fibre;
  };

  auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const double d1 = pair_distance(samples[i], samples[j], -N, 0);
        const double d2 = pair_distance(samples[i], samples[j], 0, N);
        space.dist1(i, j) = d1;
        space.dist1(j, i) = d1;
        space.dist2(i, j) = d2;
        space.dist2(j, i) = d2;
      }
  };

  const int threads = std::max(1, workers);
  if (threads == 1 || m < 64) {
    fill_rows(0, m);
  } else {
    std::vector<std::thread> pool;
    // Interleave-free block partition; only distinct (i, j) cells are
    // written by each worker, so this is race-free and deterministic.
    std::vector<std::size_t> bounds(static_cast<std::size_t>(threads) + 1, 0);
    // Balance by remaining-pair count: row i costs (m - i - 1).
    const double total_pairs = 0.5 * static_cast<double>(m) * (m - 1);
    std::size_t row = 0;
    for (int t = 1; t < threads; ++t) {
      const double target =
          total_pairs * static_cast<double>(t) / static_cast<double>(threads);
      double seen = 0.0;
      std::size_t r = bounds[static_cast<std::size_t>(t - 1)];
      seen = 0.5 * static_cast<double>(r) *
             (2.0 * static_cast<double>(m) - static_cast<double>(r) - 1.0);
      while (r < m && seen < target) {
        seen += static_cast<double>(m - r - 1);
        ++r;
      }
      bounds[static_cast<std::size_t>(t)] = r;
      row = r;
    }
    (void)row;
    bounds[static_cast<std::size_t>(threads)] = m;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(fill_rows, bounds[static_cast<std::size_t>(t)],
                        bounds[static_cast<std::size_t>(t + 1)]);
    for (auto& th : pool) th.join();
  }
  return space;
}

SampledPairSpace sample_pair_space(const ProcessModel& process, int N,
                                   std::size_t m, std::uint64_t seed,
                                   int workers) {
  const std::vector<RwrsSample> samples = sample_rwrs_batch(process, N, m, seed);
  SampledPairSpace space = pair_space_from_samples(samples, process, N, workers);
  space.metadata["process"] = process.name;
  space.metadata["N"] = std::to_string(N);
  space.metadata["seed"] = std::to_string(seed);
  return space;
}

}  // namespace rwrslab
