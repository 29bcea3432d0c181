#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sqmc {

/// Normalized importance weights: nonnegative, summing to one, with at least
/// one positive entry.
class WeightVector {
 public:
  WeightVector() = default;
  /// Validates the invariants (sum within 1e-9 of one); throws
  /// std::invalid_argument otherwise.
  explicit WeightVector(std::vector<double> w);
  /// Divides by the sum; throws std::invalid_argument if all entries are zero.
  static WeightVector normalize(std::vector<double> w);
  static WeightVector uniform(std::size_t n);

  std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }
  std::span<const double> values() const { return w_; }

  /// Entry k of the result is w[order[k]].
  WeightVector permuted(std::span<const std::size_t> order) const;

 private:
  std::vector<double> w_;
};

struct ResampleStats {
  /// Number of increments of the running label (the inner-loop work).
  std::size_t advances = 0;
};

/// Inverse-CDF labels for sorted uniforms, single O(N) pass:
/// a[n] = min{ m : w[0] + ... + w[m] > u[n] } (0-based labels).
/// A value of exactly 1 is treated as the largest double below 1.
/// Throws std::invalid_argument if u is unsorted or outside [0,1].
std::vector<std::size_t> inverse_cdf_ancestors(std::span<const double> u_sorted,
                                               const WeightVector& w,
                                               ResampleStats* stats = nullptr);

/// Multinomial resampling: inverse CDF at n_draws sorted IID uniforms drawn
/// from a counter-based stream keyed by `seed`.
std::vector<std::size_t> multinomial_ancestors(const WeightVector& w, std::size_t n_draws,
                                               std::uint64_t seed);

/// Inverse CDF over particles visited in `order`; returned labels index the
/// original (unpermuted) particles.
std::vector<std::size_t> sorted_ancestors_by_state(std::span<const double> u_sorted,
                                                   const WeightVector& w,
                                                   std::span<const std::size_t> order,
                                                   ResampleStats* stats = nullptr);

}  // namespace sqmc
