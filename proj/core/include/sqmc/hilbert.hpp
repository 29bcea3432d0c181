#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sqmc/matrix.hpp"

namespace sqmc {

/// Order-m Hilbert curve in d dimensions; keys occupy d*m <= 64 bits.
struct HilbertConfig {
  std::size_t dimension = 1;
  unsigned bits_per_axis = 62;

  /// m = floor(62 / d), the finest grid that fits a 64-bit key.
  static HilbertConfig with_default_bits(std::size_t dimension);
  /// Throws CapacityError if d*m > 64, std::invalid_argument on zeros.
  void validate() const;
};

/// Position of a grid cell along the curve.
struct HilbertKey {
  std::uint64_t value = 0;
  auto operator<=>(const HilbertKey&) const = default;
};

/// Component-wise logistic map R^d -> (0,1)^d.
struct PsiTransform {
  std::vector<double> location;
  std::vector<double> scale;

  /// Location = mean, scale = 2 * (std + eps) of the rows of `cloud`.
  static PsiTransform fit(const RowMatrix& cloud);
};

inline constexpr double kPsiEps = 0x1p-30;

/// logistic((x - location) / scale) per component, clamped to [eps, 1 - eps].
/// Throws std::invalid_argument on non-finite input or non-positive scale.
void psi_apply(std::span<const double> x, const PsiTransform& psi, std::span<double> out);

/// Key of the grid cell that contains p. Coordinates are clamped to [0,1).
HilbertKey hilbert_key(std::span<const double> p, const HilbertConfig& cfg);

/// Center of the cell with the given key. Throws CapacityError for keys
/// outside [0, 2^{dm}).
std::vector<double> hilbert_point(HilbertKey key, const HilbertConfig& cfg);

/// Stable argsort of the rows of `points` by the Hilbert key of psi(row).
/// When d == 1 the raw values are sorted directly (psi is increasing).
std::vector<std::size_t> hilbert_sort_permutation(const RowMatrix& points, const PsiTransform& psi,
                                                  const HilbertConfig& cfg);

/// Stable argsort of a scalar sequence.
std::vector<std::size_t> stable_argsort(std::span<const double> values);

}  // namespace sqmc
