#ifndef RWRSLAB_PROCGEN_HPP
#define RWRSLAB_PROCGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rwrslab/pairspace.hpp"

namespace rwrslab {

// Simulation of finite-state Markov base systems, finite-range real cocycles,
// i.i.d. / Markov sceneries, and the skew-product samples built from them.
//
// Time windows follow the two-sided convention: a sample knows its walk on
// [-N-pad; N+pad], its cocycle partial sums on [-N; N], and a scenery patch
// covering every visited site plus a comparison margin.

struct MarkovSystem {
  std::size_t alphabet = 0;
  std::vector<std::vector<double>> transitions;  // row-stochastic
  std::vector<double> stationary;

  double transition(std::size_t i, std::size_t j) const {
    return transitions[i][j];
  }
};

// Validates row sums, irreducibility and aperiodicity (power positivity),
// then computes the stationary distribution by power iteration to 1e-12.
MarkovSystem build_markov_system(
    const std::vector<std::vector<double>>& transitions);

// Uniform i.i.d. chain on k symbols.
MarkovSystem iid_uniform_system(std::size_t k);

// Closed-form entropy rate sum_i pi_i H(row_i), in nats.
double markov_entropy_rate(const MarkovSystem& system);

// Stationary probability of a block b_0..b_{r-1}.
double block_probability(const MarkovSystem& system,
                         const std::vector<int>& block);

struct FiniteRangeCocycle {
  std::size_t range = 1;
  std::vector<double> table;  // k^range entries, first symbol most significant
  double declared_mean = 0.0;
  double declared_variance = 1.0;  // effective variance estimate

  double value(const std::vector<int8_t>& path, std::ptrdiff_t pos,
               std::size_t alphabet) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < range; ++i)
      idx = idx * alphabet + static_cast<std::size_t>(path[pos + i]);
    return table[idx];
  }

  double sup_norm() const;
};

// Checks that the stationary mean of the table vanishes (within 1e-8).
void validate_cocycle(const MarkovSystem& system,
                      const FiniteRangeCocycle& cocycle);

// The +/-1 simple-random-walk cocycle over a given 2-symbol base.
FiniteRangeCocycle srw_cocycle();

enum class SceneryKind { kIid, kMarkov };

struct SceneryModel {
  SceneryKind kind = SceneryKind::kIid;
  std::size_t alphabet = 2;
  std::vector<double> probs;                       // iid
  std::vector<std::vector<double>> transitions;    // markov
  double cell_width = 1.0;

  bool trivial() const { return alphabet <= 1; }
  // Entropy (rate) of the scenery process in nats; closed form.
  double entropy() const;
};

struct MetricConfig {
  int p = 16;     // truncation depth of the 2-adic base metric
  int rho = 0;    // scenery comparison radius, in cells
};

struct ProcessModel {
  MarkovSystem base;
  FiniteRangeCocycle cocycle;
  SceneryModel scenery;
  MetricConfig metric;
  std::string name = "process";
};

ProcessModel srw_process(std::size_t scenery_alphabet);

// Two-sided stationary symbol paths on the window [-N; N).  Backward
// extension uses the reversed chain P*_{ij} = pi_j P_{ji} / pi_i.
std::vector<std::vector<int>> sample_paths(const MarkovSystem& system, int N,
                                           std::size_t count,
                                           std::uint64_t seed);

// Cocycle partial sums sigma_n for n in [-N; N] from a path covering
// [-N-pad; N+pad]; sums[N + n] = sigma_n, sigma_0 = 0.
std::vector<double> cocycle_sums(const std::vector<int8_t>& path, int N,
                                 int pad, const FiniteRangeCocycle& cocycle,
                                 std::size_t alphabet);

// Convenience overload on plain int paths indexed over [-N-pad; N+pad].
std::vector<double> cocycle_sums(const std::vector<int>& path, int N, int pad,
                                 const FiniteRangeCocycle& cocycle,
                                 std::size_t alphabet);

// Scenery site index of a real displacement: round-half-to-even of t / w.
std::int64_t scenery_site(double t, double cell_width);

struct RwrsSample {
  int N = 0;
  int pad = 0;
  std::vector<int8_t> path;     // times [-N-pad; N+pad]
  std::vector<double> sums;     // sigma_n, n in [-N; N]
  std::vector<int8_t> scenery;  // sites [site_lo; site_lo + scenery.size())
  std::int64_t site_lo = 0;
  double cell_width = 1.0;

  int symbol(int t) const { return path[static_cast<std::size_t>(t + N + pad)]; }
  double sum(int n) const { return sums[static_cast<std::size_t>(n + N)]; }
  int colour_at_site(std::int64_t site) const;
  // Invariants from the type contract; throws on violation.
  void validate(const ProcessModel& process) const;
};

// One stationary sample; `index` selects the per-sample RNG stream.
// `extra_sites` widens the scenery patch beyond the visited range.
RwrsSample sample_rwrs(const ProcessModel& process, int N, std::uint64_t seed,
                       std::uint64_t index, int extra_sites = 8);

// The (alpha, N)-name over [0; N): entry n = (step symbol, colour at the
// walker's site).  Throws when the scenery window is insufficient.
std::vector<std::pair<int, int>> rwrs_name(const RwrsSample& sample, int N);

// Per-time skew distance summed (or supped) over the window [lo; hi):
// base part is the truncated 2-adic cylinder metric between shifted walks,
// fibre part the indicator of a scenery mismatch within the comparison
// radius around the two walkers.
double skew_distance(const RwrsSample& a, const RwrsSample& b, int lo, int hi,
                     DynamicMode mode, const MetricConfig& metric);

struct OccupationMeasure {
  // Raw atoms (value, weight), sorted by value.
  std::vector<std::pair<double, double>> atoms;
  // Smoothed density on a uniform grid (empty when no bandwidth given).
  double grid_start = 0.0;
  double grid_step = 0.0;
  std::vector<double> density;

  double total_smoothed_mass() const;
};

// Occupation measure of the sums over times [lo; hi); optional triangular
// mollifier of the given half-width evaluated on a uniform grid.
OccupationMeasure occupation_measure(const std::vector<double>& sums, int N,
                                     int lo, int hi, double bandwidth = 0.0,
                                     double grid_step = 0.0);

// Exact-cell-mass discretization of the mollified occupation measure and of
// the uniform law on an interval, on the same grid (used by the smoothness
// checks).  Returns cell masses over [start; start + cells * step).
std::vector<double> mollified_cell_masses(
    const std::vector<std::pair<double, double>>& atoms, double half_width,
    double start, double step, std::size_t cells);
std::vector<double> uniform_cell_masses(double a, double b, double start,
                                        double step, std::size_t cells);

enum class TrajDirection { kForward, kBackward };

// Vertically sqrt(N)-rescaled piecewise-linear path values at t = i/N,
// i = 0..N (forward reads sigma_0..sigma_N, backward sigma_0..sigma_-N).
std::vector<double> traj_rescale(const std::vector<double>& sums, int N,
                                 int window_N, TrajDirection direction);

struct VarianceEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Var(sigma_N) / N with a bootstrap CI.
VarianceEstimate effective_variance(const ProcessModel& process, int N,
                                    std::size_t samples, std::uint64_t seed);

// m independent samples; dist1 = skew distance over [-N; 0), dist2 over
// [0; N), uniform weights.  Deterministic for fixed seed regardless of
// `workers`.
SampledPairSpace sample_pair_space(const ProcessModel& process, int N,
                                   std::size_t m, std::uint64_t seed,
                                   int workers = 1);

// Internal helper shared with the engine: the samples behind a pair space.
std::vector<RwrsSample> sample_rwrs_batch(const ProcessModel& process, int N,
                                          std::size_t m, std::uint64_t seed,
                                          int extra_sites = 8);

SampledPairSpace pair_space_from_samples(const std::vector<RwrsSample>& samples,
                                         const ProcessModel& process, int N,
                                         int workers = 1);

}  // namespace rwrslab

#endif  // RWRSLAB_PROCGEN_HPP
