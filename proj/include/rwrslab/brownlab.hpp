#ifndef RWRSLAB_BROWNLAB_HPP
#define RWRSLAB_BROWNLAB_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rwrslab/procgen.hpp"

namespace rwrslab {

// Brownian Monte Carlo: psi_BM quantiles, range overlap functionals, and
// empirical limit-theorem checks for cocycles.  Paths live on a uniform grid
// of [0,1] with n steps; increment variance 1/n, B_0 = 0.  Range functionals
// computed on the grid underestimate the continuum values by O(n^{-1/2});
// comparisons are therefore always like-with-like (both sides on grids).

struct BrownianPath {
  int n = 0;
  std::vector<double> values;  // n + 1 entries, values[0] == 0
};

std::vector<BrownianPath> sample_brownian(int n, std::size_t count,
                                          std::uint64_t seed);

struct OverlapAspect {
  double overlap = 0.0;  // Lebesgue measure of range(B) cap range(B')
  double aspect = 0.0;   // min of overlap / range lengths, 0 if degenerate
};

OverlapAspect overlap_and_aspect(const std::vector<double>& path_a,
                                 const std::vector<double>& path_b);

struct QuantileEstimate {
  double value = 0.0;  // +infinity sentinel for alpha == 1
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Empirical (1/alpha)-quantile of the range overlap of independent Brownian
// pairs; bootstrap CI.  alpha == 1 returns the infinity sentinel.
QuantileEstimate psi_bm_quantile(double alpha, int n, std::size_t count,
                                 std::uint64_t seed);

struct FunctionalGap {
  std::string functional;  // "endpoint", "sup", "range"
  double ks = 0.0;         // two-sample Kolmogorov-Smirnov distance
  bool degenerate = false; // effective variance below threshold
};

// KS distances between the law of functional(traj_N / c) over the process
// and a Brownian Monte Carlo reference on the same grid size N.
std::vector<FunctionalGap> invariance_gap(const ProcessModel& process, int N,
                                          std::size_t samples,
                                          std::uint64_t seed,
                                          std::size_t reference_count = 0);

// sup_t | F_emp(t) - Phi(t) | for the normalized endpoint sigma_N / sqrt(N),
// exact over the jump points of the empirical CDF.
double berry_esseen_gap(const ProcessModel& process, int N,
                        std::size_t samples, std::uint64_t seed);

// Same statistic evaluated on an explicitly given discrete law.
double berry_esseen_gap_of_law(const std::vector<double>& values,
                               const std::vector<double>& weights);

struct FrequencyEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Empirical frequency of max_{n<N} |sigma_n| >= b sqrt(N), with a normal CI.
FrequencyEstimate max_tail_frequency(const ProcessModel& process, int N,
                                     double b, std::size_t samples,
                                     std::uint64_t seed);

struct RatioEstimate {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// E |sigma_N|^4 / N^2 with a bootstrap CI.
RatioEstimate fourth_moment_ratio(const ProcessModel& process, int N,
                                  std::size_t samples, std::uint64_t seed);

// Standard normal CDF.
double normal_cdf(double t);

// Two-sample Kolmogorov-Smirnov distance; sorts copies of the inputs.
double ks_distance(std::vector<double> a, std::vector<double> b);

}  // namespace rwrslab

#endif  // RWRSLAB_BROWNLAB_HPP
