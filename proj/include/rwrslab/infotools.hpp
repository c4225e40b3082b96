#ifndef RWRSLAB_INFOTOOLS_HPP
#define RWRSLAB_INFOTOOLS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "rwrslab/pairspace.hpp"
#include "rwrslab/procgen.hpp"

namespace rwrslab {

// Entropy, divergence and mutual-information estimators (plug-in, natural
// logarithms throughout), approximate absolute continuity, typical sets,
// covering-number entropy, and the greedy covering machinery built on them.

// -sum p log p with 0 log 0 = 0.  Input must be a probability vector.
double entropy(const std::vector<double>& p);

// KL divergence D(p | q); +infinity when p is not absolutely continuous
// with respect to q.
double kl_divergence(const std::vector<double>& p,
                     const std::vector<double>& q);

struct AbsContinuityResult {
  bool holds = false;
  double excess = 0.0;  // mass of the maximizing set beyond M q + 0
};

// mu <<_{M,eps} nu over a finite outcome space: sum_i max(p_i - M q_i, 0)
// <= eps.  Works for sub-probability vectors as well.
AbsContinuityResult approx_abs_continuity(const std::vector<double>& p,
                                          const std::vector<double>& q,
                                          double M, double eps);

// (M, eps) = (e^C, (D + e^-1)/C): a KL bound D yields approximate absolute
// continuity at every C > 0.
std::pair<double, double> uniform_integrability_bound(double D, double C);

// --- plug-in estimators on labeled samples -----------------------------------

// Weighted plug-in entropy of a labeling.  Weights default to uniform.
double label_entropy(const std::vector<int>& labels,
                     const std::vector<double>* weights = nullptr);

// I(P;Q) = H(P) + H(Q) - H(P v Q), plug-in.
double mutual_information(const std::vector<int>& labels_p,
                          const std::vector<int>& labels_q,
                          const std::vector<double>* weights = nullptr);

// Conditional I(P;Q|R) = sum over cells of R, weighted by cell mass.
double conditional_mutual_information(const std::vector<int>& labels_p,
                                      const std::vector<int>& labels_q,
                                      const std::vector<int>& labels_r,
                                      const std::vector<double>* weights = nullptr);

// Plug-in bias scale for independence tests: (|P||Q|-|P|-|Q|+1)/(2 count).
double plugin_bias_bound(std::size_t cells_p, std::size_t cells_q,
                         std::size_t count);

// Indices of outcomes whose empirical probability lies strictly inside
// (e^{-(h+eps)L}, e^{-(h-eps)L}).
std::vector<std::size_t> typical_set(const std::vector<double>& empirical,
                                     double window_length, double eps,
                                     double h);

struct BlockEntropyRow {
  int N = 0;
  double block_entropy = 0.0;   // H(P^{[0;N)}) plug-in, nats
  double per_step = 0.0;        // H/N
  double cond_increment = 0.0;  // H_N - H_{N-1} (0 for first row)
  bool undersampled = false;    // potential bins > samples/10
};

// Plug-in block entropies of a Markov system from `samples` sampled paths.
std::vector<BlockEntropyRow> block_entropy_rate(const MarkovSystem& system,
                                                const std::vector<int>& n_list,
                                                std::size_t samples,
                                                std::uint64_t seed);

// (1/N) log cov_{1-eps}((X, d_{[0;N)}, mu), r N), greedy covering value.
double spatial_entropy_rate(const SampledSpace& space, int N, double r,
                            double eps);

// --- Section 5 covering machinery ---------------------------------------------

struct MeasureComponent {
  std::vector<double> measure;       // nonnegative, over outcome ids
  std::vector<std::size_t> support;  // support set (measure vanishes outside)
};

struct GreedyCoverOutcome {
  std::vector<std::size_t> selected;  // component indices, in pick order
  double covered_mass = 0.0;          // mu(union of selected supports)
  double size_bound = 0.0;            // M / (1 - alpha - eps)
};

// Greedy support cover: components must sum to mu; each normalized component
// must be <<_{M,eps} mu (validated).  Picks any component with at least
// (1 - alpha) conditional mass on the uncovered part (largest first, lowest
// index on ties) until the union of supports has mass > alpha.  Guarantees
// |selected| <= M / (1 - alpha - eps).
GreedyCoverOutcome greedy_support_cover(
    const std::vector<MeasureComponent>& components,
    const std::vector<double>& mu, double alpha, double M, double eps);

struct TrimResult {
  std::vector<char> V;      // subset of U, union of surviving cell pieces
  double mass_u = 0.0;
  double mass_v = 0.0;
  double thickness = 0.0;   // the guaranteed local thickness (1-alpha) mu(U)
};

// V = union over cells C with mu(U|C) >= (1-alpha) mu(U) of U cap C.
// Guarantees mu(V) >= alpha mu(U) and local ((1-alpha) mu(U))-thickness.
TrimResult trim_locally_thick(const std::vector<double>& weights,
                              const std::vector<char>& U,
                              const std::vector<int>& partition, double alpha);

struct EfficientCoverResult {
  std::vector<std::size_t> points;  // S* subset of U (point ids)
  double coverage = 0.0;            // mu(U cap T(U cap S(S*)))
  double target = 0.0;              // mu(U) - eta
  bool coverage_ok = false;
  double size_bound = 0.0;          // explicit bound from the construction
  double info = 0.0;                // the mutual information actually used
};

// Efficient cover through two partitions: returns S* in U with
// mu(U cap T-saturation(U cap S-saturation(S*))) > mu(U) - eta, following
// the Markov-cut / trim / greedy pipeline; `R` switches to the relative
// (per-R-cell) variant.  Rejects alpha <= eta.
EfficientCoverResult efficient_cover(const std::vector<double>& weights,
                                     const std::vector<int>& s_labels,
                                     const std::vector<int>& t_labels,
                                     const std::vector<char>& U, double alpha,
                                     double eta,
                                     const std::vector<int>* r_labels = nullptr);

}  // namespace rwrslab

#endif  // RWRSLAB_INFOTOOLS_HPP
