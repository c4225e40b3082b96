#ifndef RWRSLAB_PAIRSPACE_HPP
#define RWRSLAB_PAIRSPACE_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace rwrslab {

// Finite sampled representations of (pair-)pseudometric measure spaces.
// Point clouds carry a probability weight vector and dense symmetric
// distance matrices.  Ball and bi-neighbourhood conventions are strict-<
// (open balls) throughout; delta == 0 is interpreted as the zero-distance
// relation so that a 0-neighbourhood of a point in a metric space is the
// point itself.

class DistanceMatrix {
 public:
  DistanceMatrix() : m_(0) {}
  explicit DistanceMatrix(std::size_t m, double fill = 0.0)
      : m_(m), data_(m * m, fill) {}

  std::size_t size() const { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * m_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * m_ + j]; }
  const std::vector<double>& raw() const { return data_; }
  std::vector<double>& raw() { return data_; }

 private:
  std::size_t m_;
  std::vector<double> data_;
};

struct SampledSpace {
  std::vector<double> weights;  // probability vector, length m
  DistanceMatrix dist;

  std::size_t size() const { return weights.size(); }
  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

struct SampledPairSpace {
  std::vector<double> weights;
  DistanceMatrix dist1;  // "past" pseudometric
  DistanceMatrix dist2;  // "future" pseudometric
  std::map<std::string, std::string> metadata;

  std::size_t size() const { return weights.size(); }
  void validate() const;

  SampledSpace marginal(int which) const;  // which = 1 or 2
};

struct CoverWitness {
  std::vector<std::size_t> centers;
  double radius = 0.0;
  double covered_mass = 0.0;
};

struct CoverResult {
  std::size_t count = 0;
  CoverWitness witness;
  bool exact = false;
};

// Hard cap for the exhaustive set-cover solvers.
inline constexpr std::size_t kExactCoverCap = 20;
// Dense-matrix point-count cap.
inline constexpr std::size_t kMaxPoints = 20000;

using PointSet = std::vector<std::size_t>;

// --- elementary metrics -----------------------------------------------------

// Number of differing positions; throws on length mismatch.
std::size_t base_hamming_metric(const std::vector<int>& u,
                                const std::vector<int>& v);

enum class DynamicMode { kSum, kSup };

// Sum or sup of base_dist over aligned orbit positions.
double dynamic_metric(const std::vector<int>& orbit_a,
                      const std::vector<int>& orbit_b,
                      const std::function<double(int, int)>& base_dist,
                      DynamicMode mode);

// --- balls and bi-neighbourhoods --------------------------------------------

// Open ball B_r(F) as a membership mask; `within` restricts both the
// candidate points and nothing else (plain single-metric ball).
std::vector<char> ball_of_set(const SampledSpace& space, const PointSet& seed,
                              double r);

// { j : exists k, i in seed with d1(i,k) < delta and d2(k,j) < delta }.
// When `within` is provided, intermediate points k and outputs j are both
// constrained to it (the subspace semantics of bi-neighbourhoods).
std::vector<char> bi_neighbourhood_mask(
    const SampledPairSpace& space, const std::vector<char>& seed, double delta,
    const std::vector<char>* within = nullptr);

PointSet bi_neighbourhood(const SampledPairSpace& space, const PointSet& seed,
                          double delta);

bool is_bi_separated(const SampledPairSpace& space, std::size_t i,
                     std::size_t j, double delta);

// Strict-delta neighbour lists per point for both metrics; the shared
// backbone of the greedy bi-covering routines.
struct BiAdjacency {
  double delta = 0.0;
  std::vector<std::vector<int>> adj1;
  std::vector<std::vector<int>> adj2;
};

BiAdjacency build_bi_adjacency(const SampledPairSpace& space, double delta);

// Bi-neighbourhood of a single point through the adjacency lists, honoring
// an optional subspace restriction.
std::vector<int> point_bi_neighbourhood(const BiAdjacency& adjacency, int i,
                                        const std::vector<char>* within);

// --- covering numbers --------------------------------------------------------

// Minimal / greedy number of open r-balls with centers in `subset` covering
// every point of `subset` (all points when subset is absent).
CoverResult covering_number(const SampledSpace& space, double r,
                            const std::optional<PointSet>& subset, bool exact);

// Minimal / greedy |F| with mass(B_r(F)) > a.
CoverResult partial_covering_number(const SampledSpace& space, double a,
                                    double r, bool exact);

// Minimal / greedy |F| with mass(bi_neighbourhood(F, delta)) > a.  Greedy
// picks the point whose bi-neighbourhood adds the largest uncovered mass,
// ties broken by lowest point id.  `within` restricts the space to a subset
// (subspace semantics; mass threshold `a` stays absolute).  `measure`
// overrides the space weights (used by the profile engine).
CoverResult bicov_partial(const SampledPairSpace& space, double a, double delta,
                          bool exact,
                          const std::vector<char>* within = nullptr,
                          const std::vector<double>* measure = nullptr);

// --- maps between spaces -----------------------------------------------------

// Push the weights of `source` through `map` into the geometry of `target`:
// the result keeps target's matrices and receives summed fibre weights.
SampledPairSpace push_forward_space(const SampledPairSpace& source,
                                    const std::vector<std::size_t>& map,
                                    const SampledPairSpace& target);

// Heuristic upper estimate of the concentration function
// 1 - min{ mass(B_delta(U)) : candidate U with mass(U) >= 1/2 }.
// Candidates are sublevel sets of distance-to-point plus seeded random
// subsets; the result is an upper estimate only.
double concentration_profile(const SampledSpace& space, double delta,
                             std::uint64_t seed = 1, std::size_t random_sets = 32);

// --- serialization ------------------------------------------------------------

// Binary container: magic "RWPS", version, plain-text metadata header,
// m, weights, dist1, dist2 row-major as little-endian doubles.  Round-trips
// bit-exactly.
void save_pair_space(const SampledPairSpace& space, const std::string& path);
SampledPairSpace load_pair_space(const std::string& path);

}  // namespace rwrslab

#endif  // RWRSLAB_PAIRSPACE_HPP
