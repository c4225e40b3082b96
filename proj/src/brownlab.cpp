#include "rwrslab/brownlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rwrslab/rng.hpp"

namespace rwrslab {

namespace {

// Walk endpoints / extrema without materializing the path.
struct PathSummary {
  double endpoint = 0.0;
  double min = 0.0;
  double max = 0.0;
};

PathSummary brownian_summary(int n, RngStream& rng) {
  PathSummary s;
  const double step = 1.0 / std::sqrt(static_cast<double>(n));
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    value += step * rng.next_gaussian();
    s.min = std::min(s.min, value);
    s.max = std::max(s.max, value);
  }
  s.endpoint = value;
  return s;
}

}  // namespace

std::vector<BrownianPath> sample_brownian(int n, std::size_t count,
                                          std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_brownian: n < 1");
  std::vector<BrownianPath> paths(count);
  const double step = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng(seed, "brownian", s);
    BrownianPath path;
    path.n = n;
    path.values.resize(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i)
      path.values[static_cast<std::size_t>(i)] =
          path.values[static_cast<std::size_t>(i - 1)] +
          step * rng.next_gaussian();
    paths[s] = std::move(path);
  }
  return paths;
}

OverlapAspect overlap_and_aspect(const std::vector<double>& path_a,
                                 const std::vector<double>& path_b) {
  if (path_a.size() != path_b.size() || path_a.empty())
    throw std::invalid_argument("overlap_and_aspect: grid mismatch");
  const auto [min_a, max_a] = std::minmax_element(path_a.begin(), path_a.end());
  const auto [min_b, max_b] = std::minmax_element(path_b.begin(), path_b.end());
  OverlapAspect out;
  out.overlap =
      std::max(0.0, std::min(*max_a, *max_b) - std::max(*min_a, *min_b));
  const double range_a = *max_a - *min_a;
  const double range_b = *max_b - *min_b;
  if (range_a > 0.0 && range_b > 0.0)
    out.aspect = std::min(out.overlap / range_a, out.overlap / range_b);
  return out;
}

QuantileEstimate psi_bm_quantile(double alpha, int n, std::size_t count,
                                 std::uint64_t seed) {
  if (alpha < 1.0) throw std::invalid_argument("psi_bm_quantile: alpha < 1");
  QuantileEstimate est;
  if (alpha == 1.0) {
    est.value = std::numeric_limits<double>::infinity();
    est.ci_lo = est.value;
    est.ci_hi = est.value;
    return est;
  }
  std::vector<double> overlaps(count, 0.0);
  for (std::size_t s = 0; s < count; ++s) {
    RngStream rng(seed, "psi_bm", s);
    const PathSummary a = brownian_summary(n, rng);
    const PathSummary b = brownian_summary(n, rng);
    overlaps[s] =
        std::max(0.0, std::min(a.max, b.max) - std::max(a.min, b.min));
  }
  std::sort(overlaps.begin(), overlaps.end());
  const double q = 1.0 / alpha;
  auto quantile_of = [&](const std::vector<double>& sorted) {
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(sorted.size()))) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  est.value = quantile_of(overlaps);

  RngStream boot(seed, "psi_bm_boot", 0);
  const int B = 100;
  std::vector<double> stats(static_cast<std::size_t>(B), 0.0);
  std::vector<double> resample(count, 0.0);
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < count; ++i)
      resample[i] = overlaps[boot.next_below(count)];
    const std::size_t idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(count))) - 1;
    std::nth_element(resample.begin(),
                     resample.begin() + static_cast<std::ptrdiff_t>(idx),
                     resample.end());
    stats[static_cast<std::size_t>(b)] = resample[idx];
  }
  std::sort(stats.begin(), stats.end());
  est.ci_lo = stats[static_cast<std::size_t>(0.025 * B)];
  est.ci_hi = stats[static_cast<std::size_t>(0.975 * B) - 1];
  return est;
}

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double gap = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    gap = std::max(gap, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
  }
  return gap;
}

namespace {

std::vector<double> walk_summaries(const ProcessModel& process, int N,
                                   std::size_t samples, std::uint64_t seed,
                                   const char* stream,
                                   std::vector<double>* sups,
                                   std::vector<double>* ranges,
                                   std::vector<double>* abs_maxima) {
  const int pad = static_cast<int>(process.cocycle.range);
  std::vector<double> endpoints(samples, 0.0);
  for (std::size_t s = 0; s < samples; ++s) {
    RngStream rng(seed, stream, s);
    // Forward-only window is enough for [0;N) functionals.
    const std::size_t len = static_cast<std::size_t>(N + 2 * pad + 1);
    std::vector<int8_t> path(len, 0);
    const std::vector<double> pi_cdf = cumulative(process.base.stationary);
    std::vector<std::vector<double>> fwd(process.base.alphabet);
    for (std::size_t i = 0; i < process.base.alphabet; ++i)
      fwd[i] = cumulative(process.base.transitions[i]);
    int current = rng.next_categorical(pi_cdf);
    path[0] = static_cast<int8_t>(current);
    for (std::size_t t = 1; t < len; ++t) {
      current = rng.next_categorical(fwd[static_cast<std::size_t>(current)]);
      path[t] = static_cast<int8_t>(current);
    }
    double value = 0.0, lo = 0.0, hi = 0.0, abs_max = 0.0;
    for (int n = 0; n < N; ++n) {
      value += process.cocycle.value(path, n, process.base.alphabet);
      lo = std::min(lo, value);
      hi = std::max(hi, value);
      abs_max = std::max(abs_max, std::abs(value));
    }
    endpoints[s] = value;
    if (sups) (*sups)[s] = hi;
    if (ranges) (*ranges)[s] = hi - lo;
    if (abs_maxima) (*abs_maxima)[s] = abs_max;
  }
  return endpoints;
}

}  // namespace

std::vector<FunctionalGap> invariance_gap(const ProcessModel& process, int N,
                                          std::size_t samples,
                                          std::uint64_t seed,
                                          std::size_t reference_count) {
  std::vector<FunctionalGap> out = {{"endpoint", 0.0, false},
                                    {"sup", 0.0, false},
                                    {"range", 0.0, false}};
  const VarianceEstimate var =
      effective_variance(process, N, std::min<std::size_t>(samples, 20000), seed);
  if (var.value < 0.01) {
    for (auto& gap : out) gap.degenerate = true;
    return out;
  }
  const double c = std::sqrt(var.value);
  const double scale = 1.0 / (c * std::sqrt(static_cast<double>(N)));

  std::vector<double> sups(samples), ranges(samples);
  std::vector<double> endpoints = walk_summaries(process, N, samples, seed,
                                                 "invariance", &sups, &ranges,
                                                 nullptr);
  for (std::size_t s = 0; s < samples; ++s) {
    endpoints[s] *= scale;
    sups[s] = std::max(sups[s], 0.0) * scale;
    ranges[s] *= scale;
  }

  if (reference_count == 0) reference_count = std::max<std::size_t>(samples, 100000);
  std::vector<double> ref_end(reference_count), ref_sup(reference_count),
      ref_range(reference_count);
  for (std::size_t s = 0; s < reference_count; ++s) {
    RngStream rng(seed, "invariance_reference", s);
    const PathSummary b = brownian_summary(N, rng);
    ref_end[s] = b.endpoint;
    ref_sup[s] = std::max(b.max, 0.0);
    ref_range[s] = b.max - b.min;
  }
  out[0].ks = ks_distance(endpoints, ref_end);
  out[1].ks = ks_distance(sups, ref_sup);
  out[2].ks = ks_distance(ranges, ref_range);
  return out;
}

double berry_esseen_gap_of_law(const std::vector<double>& values,
                               const std::vector<double>& weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  double gap = 0.0, cdf = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double t = values[order[k]];
    const double phi = normal_cdf(t);
    gap = std::max(gap, std::abs(cdf - phi));  // left limit
    cdf += weights[order[k]];
    gap = std::max(gap, std::abs(cdf - phi));  // right value
  }
  return gap;
}

double berry_esseen_gap(const ProcessModel& process, int N,
                        std::size_t samples, std::uint64_t seed) {
  std::vector<double> endpoints =
      walk_summaries(process, N, samples, seed, "berry_esseen", nullptr,
                     nullptr, nullptr);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (double& x : endpoints) x *= scale;
  const std::vector<double> weights(samples, 1.0 / static_cast<double>(samples));
  return berry_esseen_gap_of_law(endpoints, weights);
}

FrequencyEstimate max_tail_frequency(const ProcessModel& process, int N,
                                     double b, std::size_t samples,
                                     std::uint64_t seed) {
  if (!(b > 0.0)) throw std::invalid_argument("max_tail_frequency: b <= 0");
  std::vector<double> abs_maxima(samples);
  walk_summaries(process, N, samples, seed, "max_tail", nullptr, nullptr,
                 &abs_maxima);
  const double threshold = b * std::sqrt(static_cast<double>(N));
  double hits = 0.0;
  for (double x : abs_maxima)
    if (x >= threshold) hits += 1.0;
  FrequencyEstimate est;
  est.value = hits / static_cast<double>(samples);
  const double se =
      std::sqrt(std::max(est.value * (1.0 - est.value), 1e-12) /
                static_cast<double>(samples));
  est.ci_lo = std::max(0.0, est.value - 1.96 * se);
  est.ci_hi = std::min(1.0, est.value + 1.96 * se);
  return est;
}

RatioEstimate fourth_moment_ratio(const ProcessModel& process, int N,
                                  std::size_t samples, std::uint64_t seed) {
  std::vector<double> endpoints =
      walk_summaries(process, N, samples, seed, "fourth_moment", nullptr,
                     nullptr, nullptr);
  std::vector<double> fourth(samples);
  for (std::size_t s = 0; s < samples; ++s)
    fourth[s] = endpoints[s] * endpoints[s] * endpoints[s] * endpoints[s];
  const double n2 = static_cast<double>(N) * static_cast<double>(N);
  auto mean_of = [](const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) /
           static_cast<double>(xs.size());
  };
  RatioEstimate est;
  est.value = mean_of(fourth) / n2;
  RngStream boot(0xb007, "fourth_moment_boot", seed);
  const int B = 200;
  std::vector<double> stats(static_cast<std::size_t>(B), 0.0);
  std::vector<double> resample(samples, 0.0);
  for (int b = 0; b < B; ++b) {
    for (std::size_t i = 0; i < samples; ++i)
      resample[i] = fourth[boot.next_below(samples)];
    stats[static_cast<std::size_t>(b)] = mean_of(resample) / n2;
  }
  std::sort(stats.begin(), stats.end());
  est.ci_lo = stats[static_cast<std::size_t>(0.025 * B)];
  est.ci_hi = stats[static_cast<std::size_t>(0.975 * B) - 1];
  return est;
}

}  // namespace rwrslab
