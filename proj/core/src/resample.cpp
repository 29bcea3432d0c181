#include "sqmc/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sqmc/rng.hpp"

namespace sqmc {

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("weights: empty vector");
  double sum = 0.0;
  bool positive = false;
  for (const double x : w_) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("weights: negative or non-finite entry");
    positive = positive || x > 0.0;
    sum += x;
  }
  if (!positive) throw std::invalid_argument("weights: all weights are zero");
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights: not normalized");
}

WeightVector WeightVector::normalize(std::vector<double> w) {
  double sum = 0.0;
  for (const double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("weights: negative or non-finite entry");
    sum += x;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("weights: all weights are zero");
  for (double& x : w) x /= sum;
  return WeightVector(std::move(w));
}

WeightVector WeightVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("weights: empty vector");
  return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

WeightVector WeightVector::permuted(std::span<const std::size_t> order) const {
  if (order.size() != w_.size()) throw std::invalid_argument("weights: permutation size mismatch");
  WeightVector out;
  out.w_.resize(w_.size());
  for (std::size_t k = 0; k < order.size(); ++k) out.w_[k] = w_.at(order[k]);
  return out;
}

std::vector<std::size_t> inverse_cdf_ancestors(std::span<const double> u_sorted,
                                               const WeightVector& w, ResampleStats* stats) {
  const std::size_t n_weights = w.size();
  if (n_weights == 0) throw std::invalid_argument("resample: empty weights");
  constexpr double kBelowOne = 1.0 - 0x1p-53;

  std::vector<std::size_t> labels(u_sorted.size());
  double prev = 0.0;
  double s = 0.0;
  std::size_t m = 0;  // number of weights accumulated into s
  std::size_t advances = 0;
  std::size_t last_positive = 0;
  for (std::size_t n = 0; n < u_sorted.size(); ++n) {
    double u = u_sorted[n];
    if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("resample: uniform outside [0,1]");
    if (u < prev) throw std::invalid_argument("resample: uniforms are not sorted");
    prev = u;
    if (u >= 1.0) u = kBelowOne;
    // Rounding can leave the total a hair below u; the last label absorbs it.
    while ((m == 0 || s <= u) && m < n_weights) {
      if (w[m] > 0.0) last_positive = m;
      s += w[m];
      ++m;
      ++advances;
    }
    labels[n] = s > u ? m - 1 : last_positive;
  }
  if (stats) stats->advances = advances;
  return labels;
}

std::vector<std::size_t> multinomial_ancestors(const WeightVector& w, std::size_t n_draws,
                                               std::uint64_t seed) {
  if (n_draws == 0) throw std::invalid_argument("resample: n_draws must be at least 1");
  CounterRng rng(seed);
  std::vector<double> u(n_draws);
  for (std::size_t i = 0; i < n_draws; ++i) u[i] = rng.uniform(i);
  std::sort(u.begin(), u.end());
  return inverse_cdf_ancestors(u, w);
}

std::vector<std::size_t> sorted_ancestors_by_state(std::span<const double> u_sorted,
                                                   const WeightVector& w,
                                                   std::span<const std::size_t> order,
                                                   ResampleStats* stats) {
  auto labels = inverse_cdf_ancestors(u_sorted, w.permuted(order), stats);
  for (auto& a : labels) a = order[a];
  return labels;
}

}  // namespace sqmc
