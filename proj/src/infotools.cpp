#include "rwrslab/infotools.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

constexpr double kTol = 1e-12;

double mass_of(const std::vector<char>& mask, const std::vector<double>& w) {
  double total = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) total += w[i];
  return total;
}

}  // namespace

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x < -kTol) throw std::invalid_argument("entropy: negative probability");
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double kl_divergence(const std::vector<double>& p,
                     const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: outcome sets differ");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]);
  }
  return d;
}

AbsContinuityResult approx_abs_continuity(const std::vector<double>& p,
                                          const std::vector<double>& q,
                                          double M, double eps) {
  if (p.size() != q.size())
    throw std::invalid_argument("approx_abs_continuity: outcome sets differ");
  // The maximizing set is exactly { i : p_i > M q_i }.
  double excess = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    excess += std::max(p[i] - M * q[i], 0.0);
  return {excess <= eps + kTol, excess};
}

std::pair<double, double> uniform_integrability_bound(double D, double C) {
  if (!(C > 0.0) || D < 0.0)
    throw std::invalid_argument("uniform_integrability_bound: bad arguments");
  return {std::exp(C), (D + std::exp(-1.0)) / C};
}

namespace {

struct LabelStats {
  std::vector<double> probs;
  std::unordered_map<long long, std::size_t> index;
};

LabelStats label_distribution(const std::vector<int>& labels,
                              const std::vector<double>* weights) {
  LabelStats stats;
  const double uniform =
      labels.empty() ? 0.0 : 1.0 / static_cast<double>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double w = weights ? (*weights)[i] : uniform;
    auto [it, fresh] = stats.index.try_emplace(labels[i], stats.probs.size());
    if (fresh) stats.probs.push_back(0.0);
    stats.probs[it->second] += w;
  }
  return stats;
}

}  // namespace

double label_entropy(const std::vector<int>& labels,
                     const std::vector<double>* weights) {
  return entropy(label_distribution(labels, weights).probs);
}

double mutual_information(const std::vector<int>& labels_p,
                          const std::vector<int>& labels_q,
                          const std::vector<double>* weights) {
  if (labels_p.size() != labels_q.size())
    throw std::invalid_argument("mutual_information: sample size mismatch");
  std::vector<int> joint(labels_p.size());
  // Pack the pair of labels; labels are small nonnegative cell ids in
  // practice, but map through a dictionary to stay safe.
  std::unordered_map<long long, int> dict;
  for (std::size_t i = 0; i < labels_p.size(); ++i) {
    const long long key =
        (static_cast<long long>(labels_p[i]) << 32) ^
        (static_cast<long long>(labels_q[i]) & 0xffffffffLL);
    auto [it, fresh] = dict.try_emplace(key, static_cast<int>(dict.size()));
    joint[i] = it->second;
  }
  return label_entropy(labels_p, weights) + label_entropy(labels_q, weights) -
         label_entropy(joint, weights);
}

double conditional_mutual_information(const std::vector<int>& labels_p,
                                      const std::vector<int>& labels_q,
                                      const std::vector<int>& labels_r,
                                      const std::vector<double>* weights) {
  if (labels_p.size() != labels_r.size() || labels_q.size() != labels_r.size())
    throw std::invalid_argument("cond MI: sample size mismatch");
  std::map<int, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < labels_r.size(); ++i)
    cells[labels_r[i]].push_back(i);
  const double uniform =
      labels_r.empty() ? 0.0 : 1.0 / static_cast<double>(labels_r.size());
  double total = 0.0;
  for (const auto& [cell, idx] : cells) {
    double cell_mass = 0.0;
    std::vector<int> p_sub(idx.size()), q_sub(idx.size());
    std::vector<double> w_sub(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double w = weights ? (*weights)[idx[k]] : uniform;
      cell_mass += w;
      p_sub[k] = labels_p[idx[k]];
      q_sub[k] = labels_q[idx[k]];
      w_sub[k] = w;
    }
    if (cell_mass <= 0.0) continue;
    for (double& w : w_sub) w /= cell_mass;
    total += cell_mass * mutual_information(p_sub, q_sub, &w_sub);
  }
  return total;
}

double plugin_bias_bound(std::size_t cells_p, std::size_t cells_q,
                         std::size_t count) {
  return static_cast<double>(cells_p * cells_q - cells_p - cells_q + 1) /
         (2.0 * static_cast<double>(count));
}

std::vector<std::size_t> typical_set(const std::vector<double>& empirical,
                                     double window_length, double eps,
                                     double h) {
  const double lo = std::exp(-(h + eps) * window_length);
  const double hi = std::exp(-(h - eps) * window_length);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < empirical.size(); ++i)
    if (empirical[i] > lo && empirical[i] < hi) out.push_back(i);
  return out;
}

std::vector<BlockEntropyRow> block_entropy_rate(const MarkovSystem& system,
                                                const std::vector<int>& n_list,
                                                std::size_t samples,
                                                std::uint64_t seed) {
  const int max_n = *std::max_element(n_list.begin(), n_list.end());
  // One long-enough path per sample; blocks read from time 0.
  std::vector<std::vector<int>> paths =
      sample_paths(system, std::max(max_n, 1), samples, seed);
  std::vector<BlockEntropyRow> rows;
  double prev_entropy = 0.0;
  bool first = true;
  for (int n : n_list) {
    std::unordered_map<std::uint64_t, double> counts;
    const double w = 1.0 / static_cast<double>(samples);
    for (const auto& path : paths) {
      std::uint64_t key = 0;
      for (int t = 0; t < n; ++t)
        key = key * system.alphabet +
              static_cast<std::uint64_t>(path[static_cast<std::size_t>(
                  t + static_cast<int>(path.size()) / 2)]);
      counts[key] += w;
    }
    std::vector<double> probs;
    probs.reserve(counts.size());
    for (const auto& [key, p] : counts) probs.push_back(p);
    BlockEntropyRow row;
    row.N = n;
    row.block_entropy = entropy(probs);
    row.per_step = row.block_entropy / static_cast<double>(n);
    row.cond_increment = first ? 0.0 : row.block_entropy - prev_entropy;
    row.undersampled =
        std::pow(static_cast<double>(system.alphabet), n) >
        static_cast<double>(samples) / 10.0;
    prev_entropy = row.block_entropy;
    first = false;
    rows.push_back(row);
  }
  return rows;
}

double spatial_entropy_rate(const SampledSpace& space, int N, double r,
                            double eps) {
  const CoverResult cover =
      partial_covering_number(space, 1.0 - eps, r * static_cast<double>(N),
                              /*exact=*/false);
  return std::log(static_cast<double>(cover.count)) / static_cast<double>(N);
}

GreedyCoverOutcome greedy_support_cover(
    const std::vector<MeasureComponent>& components,
    const std::vector<double>& mu, double alpha, double M, double eps) {
  if (!(alpha < 1.0 - eps))
    throw std::invalid_argument("greedy_support_cover: alpha >= 1 - eps");
  const std::size_t m = mu.size();
  // Components must sum to mu.
  std::vector<double> total(m, 0.0);
  for (const auto& comp : components) {
    if (comp.measure.size() != m)
      throw std::invalid_argument("greedy_support_cover: size mismatch");
    std::vector<char> on_support(m, 0);
    for (std::size_t i : comp.support) on_support.at(i) = 1;
    for (std::size_t i = 0; i < m; ++i) {
      if (comp.measure[i] < 0.0)
        throw std::invalid_argument("greedy_support_cover: negative measure");
      if (comp.measure[i] > kTol && !on_support[i])
        throw std::invalid_argument(
            "greedy_support_cover: measure charges points off its support");
      total[i] += comp.measure[i];
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(total[i] - mu[i]) > 1e-9)
      throw std::invalid_argument(
          "greedy_support_cover: components do not sum to mu");
  // Normalized components must be <<_{M,eps} mu.
  std::vector<std::vector<double>> normalized(components.size());
  std::vector<double> comp_mass(components.size(), 0.0);
  for (std::size_t z = 0; z < components.size(); ++z) {
    comp_mass[z] = std::accumulate(components[z].measure.begin(),
                                   components[z].measure.end(), 0.0);
    if (comp_mass[z] <= 0.0) continue;
    normalized[z] = components[z].measure;
    for (double& x : normalized[z]) x /= comp_mass[z];
    const auto check = approx_abs_continuity(normalized[z], mu, M, eps);
    if (!check.holds)
      throw std::invalid_argument(
          "greedy_support_cover: component fails the <<_{M,eps} validation");
  }

  GreedyCoverOutcome out;
  out.size_bound = M / (1.0 - alpha - eps);
  std::vector<char> covered(m, 0);
  double covered_mass = 0.0;
  std::vector<char> used(components.size(), 0);
  while (!(covered_mass > alpha)) {
    std::size_t best = components.size();
    double best_cond = -1.0;
    for (std::size_t z = 0; z < components.size(); ++z) {
      if (used[z] || comp_mass[z] <= 0.0) continue;
      double uncovered = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        if (!covered[i]) uncovered += normalized[z][i];
      if (uncovered >= 1.0 - alpha - kTol && uncovered > best_cond + kTol) {
        best_cond = uncovered;
        best = z;
      }
    }
    if (best == components.size())
      throw std::logic_error(
          "greedy_support_cover: no qualifying component (mass accounting "
          "violated)");
    used[best] = 1;
    out.selected.push_back(best);
    for (std::size_t i : components[best].support)
      if (!covered[i]) {
        covered[i] = 1;
        covered_mass += mu[i];
      }
  }
  out.covered_mass = covered_mass;
  return out;
}

TrimResult trim_locally_thick(const std::vector<double>& weights,
                              const std::vector<char>& U,
                              const std::vector<int>& partition, double alpha) {
  if (!(alpha > 0.5 && alpha < 1.0))
    throw std::invalid_argument("trim_locally_thick: alpha outside (1/2,1)");
  TrimResult out;
  out.mass_u = mass_of(U, weights);
  if (!(out.mass_u > 0.0))
    throw std::invalid_argument("trim_locally_thick: U has zero mass");
  std::map<int, double> cell_mass, cell_u_mass;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cell_mass[partition[i]] += weights[i];
    if (U[i]) cell_u_mass[partition[i]] += weights[i];
  }
  const double threshold = (1.0 - alpha) * out.mass_u;
  out.V.assign(weights.size(), 0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!U[i]) continue;
    const int cell = partition[i];
    const double cm = cell_mass[cell];
    if (cm > 0.0 && cell_u_mass[cell] / cm >= threshold - kTol) out.V[i] = 1;
  }
  out.mass_v = mass_of(out.V, weights);
  out.thickness = threshold;
  if (out.mass_v + 1e-9 < alpha * out.mass_u)
    throw std::logic_error("trim_locally_thick: mass guarantee violated");
  return out;
}

namespace {

// Saturation of a point set by a partition: union of the cells meeting it.
std::vector<char> saturate(const std::vector<int>& labels,
                           const std::vector<char>& set) {
  std::map<int, char> hit;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (set[i]) hit[labels[i]] = 1;
  std::vector<char> out(set.size(), 0);
  for (std::size_t i = 0; i < set.size(); ++i)
    if (hit.count(labels[i])) out[i] = 1;
  return out;
}

struct CorePipelineResult {
  std::vector<std::size_t> points;
  double size_bound = 0.0;
};

// The proof pipeline on one probability space: Markov cut of the S-cells by
// the KL level D = I/zeta, trim to the T-partition, then the greedy support
// cover over cell components with the explicit constants.
CorePipelineResult efficient_cover_core(const std::vector<double>& weights,
                                        const std::vector<int>& s_labels,
                                        const std::vector<int>& t_labels,
                                        const std::vector<char>& U,
                                        double alpha, double eta) {
  const std::size_t m = weights.size();
  const double zeta = eta / 3.0;
  const double info = mutual_information(s_labels, t_labels, &weights);
  const double D = info / zeta;

  // T-label dictionary.
  std::unordered_map<int, std::size_t> t_index;
  for (std::size_t i = 0; i < m; ++i)
    t_index.try_emplace(t_labels[i], t_index.size());
  const std::size_t nt = t_index.size();
  std::vector<double> t_marginal(nt, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    t_marginal[t_index[t_labels[i]]] += weights[i];

  // Per-S-cell conditional T-distributions and their KL to the marginal.
  std::map<int, std::vector<std::size_t>> s_cells;
  for (std::size_t i = 0; i < m; ++i) s_cells[s_labels[i]].push_back(i);
  std::vector<char> x1(m, 0);
  for (const auto& [cell, idx] : s_cells) {
    double cm = 0.0;
    std::vector<double> cond(nt, 0.0);
    for (std::size_t i : idx) {
      cm += weights[i];
      cond[t_index[t_labels[i]]] += weights[i];
    }
    if (cm <= 0.0) continue;
    for (double& x : cond) x /= cm;
    if (kl_divergence(cond, t_marginal) <= D + kTol)
      for (std::size_t i : idx) x1[i] = 1;
  }

  std::vector<char> u1(m, 0);
  for (std::size_t i = 0; i < m; ++i) u1[i] = U[i] && x1[i];
  const double mass_u1 = mass_of(u1, weights);
  if (!(mass_u1 > 0.0)) return {};

  const double gamma = zeta * mass_u1;
  const TrimResult trim = trim_locally_thick(weights, u1, t_labels, 1.0 - zeta);
  const std::vector<char>& V = trim.V;
  const double mass_v = trim.mass_v;
  if (!(mass_v > 0.0)) return {};

  const double eps_g = zeta / 2.0;
  const double C = (D + std::exp(-1.0)) / (eps_g * (alpha - eta));
  const double M_chain =
      C > 690.0 ? std::numeric_limits<double>::infinity() : std::exp(C) / gamma;

  // Components per S-cell meeting V: hat mu_A on T-labels, weight mu(A).
  std::vector<double> mu_t(nt, 0.0);  // psi_* (mu|_V)
  for (std::size_t i = 0; i < m; ++i)
    if (V[i]) mu_t[t_index[t_labels[i]]] += weights[i] / mass_v;
  struct Component {
    int cell;
    double cell_mass;
    std::vector<double> hat;  // (1/mu(V)) psi_*(1_V mu|_A)
    std::vector<std::size_t> labels;
  };
  std::vector<Component> comps;
  for (const auto& [cell, idx] : s_cells) {
    double cm = 0.0, vm = 0.0;
    for (std::size_t i : idx) cm += weights[i];
    std::vector<double> hat(nt, 0.0);
    for (std::size_t i : idx)
      if (V[i]) {
        vm += weights[i];
        hat[t_index[t_labels[i]]] += weights[i];
      }
    if (vm <= 0.0 || cm <= 0.0) continue;
    Component comp;
    comp.cell = cell;
    comp.cell_mass = cm;
    for (double& x : hat) x /= (mass_v * cm);
    comp.hat = std::move(hat);
    for (std::size_t t = 0; t < nt; ++t)
      if (comp.hat[t] > 0.0) comp.labels.push_back(t);
    comps.push_back(std::move(comp));
  }

  // Greedy: pick the component with the largest uncovered hat-mass, provided
  // it reaches the zeta threshold; stop once mu_t-coverage exceeds 1 - zeta.
  std::vector<char> covered_label(nt, 0);
  double covered = 0.0;
  std::vector<char> used(comps.size(), 0);
  std::vector<int> picked_cells;
  const std::size_t pick_cap = comps.size();
  while (!(covered > 1.0 - zeta) && picked_cells.size() < pick_cap) {
    std::size_t best = comps.size();
    double best_gain = -1.0;
    for (std::size_t z = 0; z < comps.size(); ++z) {
      if (used[z]) continue;
      double gain = 0.0;
      for (std::size_t t : comps[z].labels)
        if (!covered_label[t]) gain += comps[z].hat[t];
      if (gain >= zeta - kTol && gain > best_gain + kTol) {
        best_gain = gain;
        best = z;
      }
    }
    if (best == comps.size()) break;
    used[best] = 1;
    picked_cells.push_back(comps[best].cell);
    for (std::size_t t : comps[best].labels)
      if (!covered_label[t]) {
        covered_label[t] = 1;
        covered += mu_t[t];
      }
  }

  CorePipelineResult out;
  out.size_bound = M_chain / eps_g;
  // Representative point (lowest id) of V in each picked cell.
  for (int cell : picked_cells) {
    for (std::size_t i : s_cells[cell])
      if (V[i]) {
        out.points.push_back(i);
        break;
      }
  }
  return out;
}

}  // namespace

EfficientCoverResult efficient_cover(const std::vector<double>& weights,
                                     const std::vector<int>& s_labels,
                                     const std::vector<int>& t_labels,
                                     const std::vector<char>& U, double alpha,
                                     double eta,
                                     const std::vector<int>* r_labels) {
  if (!(eta > 0.0 && eta < alpha))
    throw std::invalid_argument("efficient_cover: need 0 < eta < alpha");
  const std::size_t m = weights.size();
  const double mass_u = mass_of(U, weights);
  if (mass_u + 1e-12 < alpha)
    throw std::invalid_argument("efficient_cover: mu(U) < alpha");

  EfficientCoverResult result;
  const double zeta = eta / 3.0;

  if (!r_labels) {
    result.info = mutual_information(s_labels, t_labels, &weights);
    const CorePipelineResult core =
        efficient_cover_core(weights, s_labels, t_labels, U, alpha, eta);
    result.points = core.points;
    result.size_bound = core.size_bound;
  } else {
    // Relative variant: Markov cut of the R-cells by the conditional mutual
    // information level, trim to R, then the plain pipeline per cell.  The
    // per-cell tolerance is capped by half the conditional subset mass so the
    // inner constants stay positive.
    result.info =
        conditional_mutual_information(s_labels, t_labels, *r_labels, &weights);
    const double J = result.info / zeta;
    std::map<int, std::vector<std::size_t>> r_cells;
    for (std::size_t i = 0; i < m; ++i) r_cells[(*r_labels)[i]].push_back(i);
    std::vector<char> u0(m, 0);
    for (auto& [cell, idx] : r_cells) {
      double cm = 0.0;
      for (std::size_t i : idx) cm += weights[i];
      if (cm <= 0.0) continue;
      std::vector<int> ps, qs;
      std::vector<double> ws;
      for (std::size_t i : idx) {
        ps.push_back(s_labels[i]);
        qs.push_back(t_labels[i]);
        ws.push_back(weights[i] / cm);
      }
      if (mutual_information(ps, qs, &ws) <= J + kTol)
        for (std::size_t i : idx)
          if (U[i]) u0[i] = 1;
    }
    if (mass_of(u0, weights) <= 0.0) {
      result.points.clear();
    } else {
      const TrimResult trim =
          trim_locally_thick(weights, u0, *r_labels, 1.0 - zeta);
      double worst_bound = 0.0;
      for (auto& [cell, idx] : r_cells) {
        double cm = 0.0, vm = 0.0;
        for (std::size_t i : idx) {
          cm += weights[i];
          if (trim.V[i]) vm += weights[i];
        }
        if (vm <= 0.0 || cm <= 0.0) continue;
        std::vector<double> w_sub;
        std::vector<int> s_sub, t_sub;
        std::vector<char> u_sub;
        for (std::size_t i : idx) {
          w_sub.push_back(weights[i] / cm);
          s_sub.push_back(s_labels[i]);
          t_sub.push_back(t_labels[i]);
          u_sub.push_back(trim.V[i]);
        }
        const double alpha_inner = vm / cm;
        const double eta_inner = std::min(zeta, alpha_inner / 2.0);
        const CorePipelineResult core = efficient_cover_core(
            w_sub, s_sub, t_sub, u_sub, alpha_inner, eta_inner);
        worst_bound = std::max(worst_bound, core.size_bound);
        for (std::size_t local : core.points)
          result.points.push_back(idx[local]);
      }
      result.size_bound =
          worst_bound * static_cast<double>(std::max<std::size_t>(
                            r_cells.size(), 1));
    }
  }

  // S* must sit inside U; the pipeline picks from V subset of U already, but
  // assert it and compute the coverage guarantee.
  std::vector<char> s_star(m, 0);
  for (std::size_t i : result.points) {
    if (!U[i]) throw std::logic_error("efficient_cover: point escaped U");
    s_star[i] = 1;
  }
  std::vector<char> s_sat = saturate(s_labels, s_star);
  for (std::size_t i = 0; i < m; ++i) s_sat[i] = s_sat[i] && U[i];
  std::vector<char> t_sat = saturate(t_labels, s_sat);
  for (std::size_t i = 0; i < m; ++i) t_sat[i] = t_sat[i] && U[i];
  result.coverage = mass_of(t_sat, weights);
  result.target = mass_u - eta;
  result.coverage_ok = result.coverage > result.target;
  return result;
}

}  // namespace rwrslab
