#ifndef RWRSLAB_BICOV_HPP
#define RWRSLAB_BICOV_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rwrslab/pairspace.hpp"
#include "rwrslab/procgen.hpp"

namespace rwrslab {

// The BICOV profile min-max estimator: Min-er proposes density-bounded
// measures, Max-er proposes mass-kappa subsets, and the inner value is the
// kappa'-partial bi-covering number of the subspace (intermediate points
// constrained to the subset, target mass absolute under the Min-er measure).

struct CompetitionConfig {
  double alpha = 2.0;        // Min-er density bound, >= 1
  double kappa = 0.5;        // Max-er subset mass
  double kappa_prime = 0.25; // inner target mass (absolute), < kappa
  double delta = 0.1;        // bi-neighbourhood radius per unit N
  int miner_budget = 12;     // candidate-measure cap
  int maxer_restarts = 3;    // random-restart subsets per candidate
  bool exact_inner = false;  // exhaustive inner covers (small spaces only)
  std::uint64_t seed = 1;

  void validate() const;
};

struct MinerCandidate {
  std::vector<double> weights;
  std::string id;
};

struct BicovProfileResult {
  std::size_t value = 0;
  std::vector<double> miner_weights;
  std::vector<char> maxer_subset;
  CoverWitness witness;
  std::string miner_id;
  std::string maxer_id;
  bool exact = false;

  // Re-verifies the density bound, mu'(U) >= kappa, and the witness mass.
  bool verify(const SampledPairSpace& space, const CompetitionConfig& config) const;
};

// Candidate Min-er measures: the original weights, conditionals on
// trajectory-window classes of the rescaled cocycle paths, and conditionals
// on Shannon-McMillan-typical scenery classes.  Every candidate satisfies
// the entrywise density bound.  The samples/process pair is optional; without
// it only the original weights are emitted.
std::vector<MinerCandidate> miner_candidates(
    const SampledPairSpace& space, const std::vector<RwrsSample>* samples,
    const ProcessModel* process, double alpha, int budget, std::uint64_t seed);

// Max-er subset candidates for a given Min-er measure: the full space, the
// greedy bi-cover-resistant trimming, and seeded random restarts.  Each has
// mu'(U) >= kappa.
std::vector<std::pair<std::vector<char>, std::string>> maxer_subsets(
    const SampledPairSpace& space, const std::vector<double>& miner_weights,
    double kappa, double delta, int restarts, std::uint64_t seed);

// min over Min-er candidates of max over Max-er subsets of the inner
// (greedy or exact) bicov_partial.  `delta` in the config is used as an
// absolute radius here; callers scale by N beforehand.
BicovProfileResult estimate_bicov_profile(
    const SampledPairSpace& space, const CompetitionConfig& config,
    const std::vector<RwrsSample>* samples = nullptr,
    const ProcessModel* process = nullptr);

// Full enumeration over (A, U, F):  Min-er ranges over conditionals mu|_A
// with mass(A) >= 1/alpha, Max-er over all subsets U with mu'(U) >= kappa,
// and the inner cover is exact.  Hard size cap of 12 points.
BicovProfileResult exact_bicov_profile(const SampledPairSpace& space,
                                       const CompetitionConfig& config);

struct RateCurvePoint {
  int N = 0;
  double mean_log_value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<double> per_seed_log_values;
};

struct RateCurve {
  std::vector<RateCurvePoint> points;
  double slope = 0.0;     // least-squares slope of log value vs sqrt(N)
  double slope_ci_lo = 0.0;
  double slope_ci_hi = 0.0;
};

// Per-N profile estimates over `seeds` independent replications; the slope
// regresses log value on sqrt(N).
RateCurve rate_curve(const ProcessModel& process, const std::vector<int>& n_list,
                     const CompetitionConfig& config, std::size_t m,
                     const std::vector<std::uint64_t>& seeds, int workers = 1);

struct PsiReferenceEntry {
  double alpha = 0.0;
  double psi = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// psi_BM(alpha) * h from a stored reference table; alpha == 1 maps to the
// infinity sentinel when h > 0 and to 0 when h == 0.
double theoretical_rate(double alpha, double h,
                        const std::vector<PsiReferenceEntry>& table);

std::vector<PsiReferenceEntry> load_psi_reference(const std::string& path);

}  // namespace rwrslab

#endif  // RWRSLAB_BICOV_HPP
