#include "sqmc/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sqmc/errors.hpp"

namespace sqmc {
namespace {

using Coord = std::uint64_t;

// Skilling, "Programming the Hilbert curve" (2004): in-place conversion
// between axis coordinates and the transposed Hilbert index.
void axes_to_transpose(std::span<Coord> x, unsigned bits) {
  const std::size_t n = x.size();
  const Coord top = Coord{1} << (bits - 1);
  for (Coord q = top; q > 1; q >>= 1) {
    const Coord p = q - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const Coord t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  for (std::size_t i = 1; i < n; ++i) x[i] ^= x[i - 1];
  Coord t = 0;
  for (Coord q = top; q > 1; q >>= 1)
    if (x[n - 1] & q) t ^= q - 1;
  for (std::size_t i = 0; i < n; ++i) x[i] ^= t;
}

void transpose_to_axes(std::span<Coord> x, unsigned bits) {
  const std::size_t n = x.size();
  const Coord end = Coord{2} << (bits - 1);
  Coord t = x[n - 1] >> 1;
  for (std::size_t i = n - 1; i > 0; --i) x[i] ^= x[i - 1];
  x[0] ^= t;
  for (Coord q = 2; q != end; q <<= 1) {
    const Coord p = q - 1;
    for (std::size_t i = n; i-- > 0;) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
}

Coord to_grid(double p, unsigned bits) {
  const double cells = std::ldexp(1.0, static_cast<int>(bits));
  const Coord max_cell = (bits == 64 ? ~Coord{0} : (Coord{1} << bits) - 1);
  if (!(p > 0.0)) return 0;
  const double scaled = p * cells;
  if (scaled >= cells) return max_cell;
  return std::min(static_cast<Coord>(scaled), max_cell);
}

std::uint64_t interleave(std::span<const Coord> x, unsigned bits) {
  std::uint64_t key = 0;
  for (unsigned level = bits; level-- > 0;)
    for (const Coord c : x) key = (key << 1) | ((c >> level) & 1u);
  return key;
}

void deinterleave(std::uint64_t key, unsigned bits, std::span<Coord> x) {
  const std::size_t n = x.size();
  std::fill(x.begin(), x.end(), 0);
  std::size_t pos = static_cast<std::size_t>(bits) * n;
  for (unsigned level = bits; level-- > 0;)
    for (std::size_t i = 0; i < n; ++i) {
      --pos;
      x[i] |= ((key >> pos) & 1u) << level;
    }
}

}  // namespace

HilbertConfig HilbertConfig::with_default_bits(std::size_t dimension) {
  if (dimension == 0) throw std::invalid_argument("hilbert: dimension must be positive");
  if (dimension > 62) throw CapacityError("hilbert: dimension exceeds 62 (one bit per axis)");
  return {dimension, static_cast<unsigned>(62 / dimension)};
}

void HilbertConfig::validate() const {
  if (dimension == 0 || bits_per_axis == 0)
    throw std::invalid_argument("hilbert: dimension and bits_per_axis must be positive");
  if (dimension * bits_per_axis > 64)
    throw CapacityError("hilbert: d*m = " + std::to_string(dimension * bits_per_axis) +
                        " exceeds the 64-bit key width");
}

PsiTransform PsiTransform::fit(const RowMatrix& cloud) {
  const std::size_t n = cloud.rows();
  const std::size_t d = cloud.cols();
  PsiTransform psi{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  if (n == 0) {
    std::fill(psi.scale.begin(), psi.scale.end(), 1.0);
    return psi;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) psi.location[k] += cloud(i, k);
  for (auto& m : psi.location) m /= static_cast<double>(n);
  std::vector<double> ss(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double z = cloud(i, k) - psi.location[k];
      ss[k] += z * z;
    }
  for (std::size_t k = 0; k < d; ++k)
    psi.scale[k] = 2.0 * (std::sqrt(ss[k] / static_cast<double>(n)) + kPsiEps);
  return psi;
}

void psi_apply(std::span<const double> x, const PsiTransform& psi, std::span<double> out) {
  if (psi.location.size() != x.size() || psi.scale.size() != x.size() || out.size() != x.size())
    throw std::invalid_argument("psi: dimension mismatch");
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!std::isfinite(x[k])) throw std::invalid_argument("psi: non-finite state component");
    if (!(psi.scale[k] > 0.0)) throw std::invalid_argument("psi: scale must be positive");
    const double z = (x[k] - psi.location[k]) / psi.scale[k];
    const double v = 1.0 / (1.0 + std::exp(-z));
    out[k] = std::clamp(v, kPsiEps, 1.0 - kPsiEps);
  }
}

HilbertKey hilbert_key(std::span<const double> p, const HilbertConfig& cfg) {
  cfg.validate();
  if (p.size() != cfg.dimension) throw std::invalid_argument("hilbert: dimension mismatch");
  if (cfg.dimension == 1) return {to_grid(p[0], cfg.bits_per_axis)};
  Coord buf[64];
  std::span<Coord> x(buf, cfg.dimension);
  for (std::size_t k = 0; k < cfg.dimension; ++k) x[k] = to_grid(p[k], cfg.bits_per_axis);
  axes_to_transpose(x, cfg.bits_per_axis);
  return {interleave(x, cfg.bits_per_axis)};
}

std::vector<double> hilbert_point(HilbertKey key, const HilbertConfig& cfg) {
  cfg.validate();
  const std::size_t total_bits = cfg.dimension * cfg.bits_per_axis;
  if (total_bits < 64 && key.value >= (std::uint64_t{1} << total_bits))
    throw CapacityError("hilbert: key out of range");
  const double cell = std::ldexp(1.0, -static_cast<int>(cfg.bits_per_axis));
  std::vector<double> out(cfg.dimension);
  if (cfg.dimension == 1) {
    out[0] = (static_cast<double>(key.value) + 0.5) * cell;
    return out;
  }
  Coord buf[64];
  std::span<Coord> x(buf, cfg.dimension);
  deinterleave(key.value, cfg.bits_per_axis, x);
  transpose_to_axes(x, cfg.bits_per_axis);
  for (std::size_t k = 0; k < cfg.dimension; ++k)
    out[k] = (static_cast<double>(x[k]) + 0.5) * cell;
  return out;
}

std::vector<std::size_t> stable_argsort(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

std::vector<std::size_t> hilbert_sort_permutation(const RowMatrix& points, const PsiTransform& psi,
                                                  const HilbertConfig& cfg) {
  cfg.validate();
  if (points.cols() != cfg.dimension) throw std::invalid_argument("hilbert: dimension mismatch");
  if (cfg.dimension == 1) return stable_argsort(points.column(0));

  const std::size_t n = points.rows();
  std::vector<std::uint64_t> keys(n);
  std::vector<double> mapped(cfg.dimension);
  for (std::size_t i = 0; i < n; ++i) {
    psi_apply(points.row(i), psi, mapped);
    keys[i] = hilbert_key(mapped, cfg).value;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

}  // namespace sqmc
