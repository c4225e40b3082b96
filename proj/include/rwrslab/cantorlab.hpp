#ifndef RWRSLAB_CANTORLAB_HPP
#define RWRSLAB_CANTORLAB_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwrslab/procgen.hpp"

namespace rwrslab {

// Scale ladders, meandering detection, good-time sets, discrete Cantor
// structures and the constructive searches built from them.

struct ScaleLadder {
  int depth = 0;
  std::vector<std::uint64_t> multipliers;  // L_1 .. L_depth
  std::vector<double> block_lengths;       // N_0 = 1, N_d = L_d N_{d-1}
  std::vector<double> alphas;              // alpha_d = 1/(d+1)^2, d = 1..depth

  double N(int d) const { return block_lengths[static_cast<std::size_t>(d)]; }
  std::uint64_t L(int d) const {
    return multipliers[static_cast<std::size_t>(d - 1)];
  }
  double alpha(int d) const { return alphas[static_cast<std::size_t>(d - 1)]; }
  // kappa_{r,d} = prod_{i=r+1}^d (1 - alpha_i).
  double kappa(int r, int d) const;
};

// Paper-style ladder L_d = ceil((d+1)^exponent); rejects N_depth > budget.
ScaleLadder make_ladder(int depth, double exponent = 18.0,
                        double budget = 1e18);
// Explicit small multipliers for desk-scale experiments.
ScaleLadder make_ladder_explicit(const std::vector<std::uint64_t>& multipliers,
                                 double budget = 1e18);

struct DiscreteCantorSet {
  int depth = 0;
  std::vector<double> values;  // 2^depth entries, omega in binary order

  bool proper() const;
};

struct DiscreteCantorFamily {
  int depth = 0;
  std::vector<std::pair<double, double>> intervals;  // closed [lo, hi]

  bool pairwise_disjoint() const;
};

struct DiscreteCantorMatching {
  DiscreteCantorFamily family;
  DiscreteCantorSet offsets;
};

struct GapCheck {
  bool ok = true;
  std::size_t first_i = 0, first_j = 0;  // first violating pair
};

// Exhaustive pair check of |t_w - t_w'| <= D_{i+1} (respectively
// diam(K_w cup K_w') <= D_{i+1}) over all distinct index pairs.
GapCheck check_gap_bounds(const DiscreteCantorSet& set,
                          const std::vector<double>& D);
GapCheck check_gap_bounds(const DiscreteCantorFamily& family,
                          const std::vector<double>& D);
GapCheck check_gap_bounds(const DiscreteCantorMatching& matching,
                          const std::vector<double>& D);

double structure_distance(const DiscreteCantorSet& a,
                          const DiscreteCantorSet& b);
double structure_distance(const DiscreteCantorFamily& a,
                          const DiscreteCantorFamily& b);
double structure_distance(const DiscreteCantorMatching& a,
                          const DiscreteCantorMatching& b);

enum class CantorKind { kSet, kFamily, kMatching };

// (2L/delta)(2D_1/delta)(2D_2/delta)^2 ... (2D_d/delta)^{2^{d-1}}, raised to
// the power 1 / 2 / 3 for set / family / matching.  Enforces the validity
// window delta <= D_d / 10 and delta <= L / 10.
double covering_bound_formula(CantorKind kind, double L,
                              const std::vector<double>& D, double delta);

struct IntegerDcsCount {
  std::uint64_t count = 0;
  // Materialized tuples when `collect` was set (small counts only).
  std::vector<std::vector<long long>> tuples;
};

// Exhaustive enumeration of integer-valued discrete Cantor sets in the
// integer interval [k_lo; k_hi] with integer gap bounds D, depth <= 3.
// Enumeration budget 1e8 candidate tuples.
IntegerDcsCount enumerate_dcs_integer(long long k_lo, long long k_hi,
                                      const std::vector<long long>& D,
                                      int depth, bool collect = false);

// --- meandering ---------------------------------------------------------------

// sigma holds the L*M cocycle values over the interval; the trajectory is
// (alpha, ell)-meandering iff every subfamily of >= alpha L of the length-M
// blocks contains two blocks whose images are > 2 ell apart.  Computed by an
// interval-stabbing sweep over the ell-fattened image hulls; exact provided
// ell bounds the one-step increments (the standing assumption ell >= |sigma|).
bool is_meandering(const std::vector<double>& sigma, int M, double alpha,
                   double ell);

struct MeanderFrequency {
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

MeanderFrequency meandering_frequency(const ProcessModel& process, int M,
                                      int L, double alpha, double ell,
                                      std::size_t samples, std::uint64_t seed);

// --- good-time sets -----------------------------------------------------------

struct GoodTimeParams {
  int r = 1;
  int d = 2;
  double ell = 1.0;
  double smooth_M = 8.0;    // the M of the occupation-smoothness comparison
  double smooth_eps = 0.25; // its epsilon
  // Meandering fraction per scale; 0 means the ladder's alpha_s.  Desk-scale
  // ladders have alpha_s L_s < 1, which leaves the meandering quantifier
  // vacuously false (no subfamily holds two blocks), so experiments override
  // the fraction explicitly.
  double meander_alpha = 0.0;
};

struct GoodTimeSets {
  // Flags per scale-r block index inside Q = [0; N_d).
  std::vector<char> meander;  // block lies in every H^mndr_s, s = r+1..d
  std::vector<char> spread;
  std::vector<char> smooth;
  std::vector<char> all;      // intersection
  double combined_fraction = 0.0;  // |triple intersection| / N_d
};

// H^mndr / H^spread / H^smooth over Q = [0; N_d) for a sample's sums.
GoodTimeSets good_time_sets(const RwrsSample& sample, const ScaleLadder& ladder,
                            const GoodTimeParams& params);

// --- adapted families and coverings -------------------------------------------

struct AdaptedFamily {
  int r = 0, d = 0;
  std::vector<long long> block_index;        // 2^{d-r} scale-r block indices
  DiscreteCantorFamily block_intervals;      // the time blocks, closed
  DiscreteCantorFamily image_intervals;      // ell-fattened cocycle images
};

struct AdaptedFamilySearch {
  bool success = false;
  int failed_scale = 0;  // scale at which no separated pair existed
  bool preconditions_met = true;
  AdaptedFamily family;
};

// Recursive search for a discrete Cantor family of scale-r blocks inside the
// good blocks J, adapted to (D_d, ..., D_r), whose ell-fattened cocycle
// images are pairwise disjoint.  Results are re-verified before returning.
AdaptedFamilySearch find_adapted_family(const std::vector<long long>& good_blocks,
                                        const RwrsSample& sample,
                                        const ScaleLadder& ladder, int r, int d,
                                        double ell);

// Independent verifier for the adapted-family postconditions.
bool verify_adapted_family(const AdaptedFamily& family,
                           const RwrsSample& sample, const ScaleLadder& ladder,
                           double ell);

struct FamilyCover {
  bool success = false;
  bool stall = false;
  bool preconditions_met = true;
  std::vector<AdaptedFamily> families;
  double range_length = 0.0;    // Lebesgue measure of B_ell(sigma_{[0;N_d)})
  double residual = 0.0;        // uncovered part of the range
  double efficiency = 0.0;      // sum of image lengths / range length
  double spread_scale = 0.0;    // N_r^{1/3} floor for image half-lengths
};

struct CoverParams {
  int r = 1, d = 2;
  double ell = 1.0;
  double eta = 0.25;
  double smooth_M = 8.0;
  double smooth_eps = 0.25;
  int max_families = 256;
};

// Step-3 recursion: repeatedly restrict to good blocks whose occupation
// measure charges the uncovered region and extract adapted families until
// the residual drops below eta * range.
FamilyCover cover_with_families(const RwrsSample& sample,
                                const std::vector<long long>& good_blocks,
                                const ScaleLadder& ladder,
                                const CoverParams& params);

bool verify_family_cover(const FamilyCover& cover, const RwrsSample& sample,
                         const ScaleLadder& ladder, const CoverParams& params);

struct MatchingParams {
  int r = 1, d = 2;
  double ell = 1.0;
  double eta = 0.25;
  double delta = 0.1;        // closeness budget per time step
  double tilde_delta = 0.25; // base-agreement threshold defining P
  double smooth_M = 8.0;
  double smooth_eps = 0.25;
  double meander_alpha = 0.0;  // see GoodTimeParams
};

struct MatchingExtraction {
  bool success = false;
  bool preconditions_met = true;
  bool p1_ok = false;  // |u_w| < 2 eta sqrt(N_d)
  bool p2_ok = false;  // range mostly covered
  bool p3_ok = false;  // sceneries agree across matchings
  std::vector<DiscreteCantorMatching> matchings;
  double agreement_fraction = 0.0;  // |P| / N_d
  FamilyCover cover;
};

// Builds the agreement set P of the two samples, covers it with adapted
// families of sample_a, and emits matchings (B_ell(sigma^y_Q), offset) with
// offsets u_w = sigma^{y'}_{min Q} - sigma^y_{min Q}.  Properties (P1)-(P3)
// are verified on the output.
MatchingExtraction extract_matchings(const RwrsSample& sample_a,
                                     const RwrsSample& sample_b,
                                     const ProcessModel& process,
                                     const ScaleLadder& ladder,
                                     const MatchingParams& params);

// Serialization of Cantor structures to a JSON-compatible record.
std::string cantor_to_json(const DiscreteCantorMatching& matching,
                           const std::string& provenance);

}  // namespace rwrslab

#endif  // RWRSLAB_CANTORLAB_HPP
