#include "sqmc/lowdisc.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sqmc/errors.hpp"
#include "sqmc/rng.hpp"

namespace sqmc {
namespace detail {
extern const std::string_view kBundledSobolDirections;
}  // namespace detail

namespace {

std::uint32_t reverse_bits(std::uint32_t x) {
  x = ((x >> 1) & 0x55555555u) | ((x & 0x55555555u) << 1);
  x = ((x >> 2) & 0x33333333u) | ((x & 0x33333333u) << 2);
  x = ((x >> 4) & 0x0f0f0f0fu) | ((x & 0x0f0f0f0fu) << 4);
  x = ((x >> 8) & 0x00ff00ffu) | ((x & 0x00ff00ffu) << 8);
  return (x >> 16) | (x << 16);
}

// Bijection on 32-bit words in which bit k of the output depends only on bits
// 0..k of the input: a Laine-Karras style permutation with a stronger
// seed-dependent mixing stage.
std::uint32_t lk_permute(std::uint32_t x, std::uint32_t seed) {
  x ^= x * 0x3d20adeau;
  x += seed;
  x *= (seed >> 16) | 1u;
  x ^= x * 0x05526c56u;
  x ^= x * 0x53a22864u;
  return x;
}

SobolTable::Directions build_directions(unsigned degree, std::uint32_t poly,
                                        const std::vector<std::uint32_t>& m) {
  SobolTable::Directions v{};
  if (degree == 0) {
    for (int k = 0; k < kSobolBits; ++k) v[k] = 1u << (kSobolBits - 1 - k);
    return v;
  }
  for (unsigned k = 0; k < degree && k < static_cast<unsigned>(kSobolBits); ++k)
    v[k] = m[k] << (kSobolBits - 1 - k);
  for (unsigned k = degree; k < static_cast<unsigned>(kSobolBits); ++k) {
    std::uint32_t value = v[k - degree] ^ (v[k - degree] >> degree);
    for (unsigned i = 1; i < degree; ++i) {
      if ((poly >> (degree - 1 - i)) & 1u) value ^= v[k - i];
    }
    v[k] = value;
  }
  return v;
}

}  // namespace

SobolTable SobolTable::parse(std::istream& in) {
  SobolTable table;
  std::string line;
  std::size_t expected = 1;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::size_t dim = 0;
    unsigned degree = 0;
    std::uint32_t poly = 0;
    if (!(fields >> dim >> degree >> poly))
      throw std::invalid_argument("sobol table: malformed line '" + line + "'");
    if (dim != expected)
      throw std::invalid_argument("sobol table: expected dimension " + std::to_string(expected) +
                                  ", got " + std::to_string(dim));
    std::vector<std::uint32_t> m(degree);
    for (unsigned k = 0; k < degree; ++k) {
      if (!(fields >> m[k]))
        throw std::invalid_argument("sobol table: missing direction integer in dimension " +
                                    std::to_string(dim));
      if ((m[k] & 1u) == 0 || m[k] >= (2u << k))
        throw std::invalid_argument("sobol table: invalid direction integer in dimension " +
                                    std::to_string(dim));
    }
    table.directions_.push_back(build_directions(degree, poly, m));
    ++expected;
  }
  if (table.directions_.empty()) throw std::invalid_argument("sobol table: no dimensions");
  return table;
}

std::shared_ptr<const SobolTable> SobolTable::bundled() {
  static const std::shared_ptr<const SobolTable> table = [] {
    std::istringstream in{std::string(detail::kBundledSobolDirections)};
    return std::make_shared<const SobolTable>(parse(in));
  }();
  return table;
}

const SobolTable::Directions& SobolTable::directions(std::size_t j) const {
  if (j >= directions_.size())
    throw CapacityError("sobol dimension " + std::to_string(j + 1) + " exceeds table capacity " +
                        std::to_string(directions_.size()));
  return directions_[j];
}

void SobolSpec::validate() const {
  if (dimension == 0) throw std::invalid_argument("sobol: dimension must be positive");
  if (bits < 1 || bits > kSobolBits) throw std::invalid_argument("sobol: bits must be in [1, 32]");
  if (!table) throw std::invalid_argument("sobol: no direction table");
  if (dimension > table->max_dimension())
    throw CapacityError("sobol dimension " + std::to_string(dimension) +
                        " exceeds table capacity " + std::to_string(table->max_dimension()));
}

ScrambleState ScrambleState::for_step(std::uint64_t master_seed, std::uint64_t t) {
  return {derive_key(derive_key(master_seed, static_cast<std::uint64_t>(Stream::scramble)), t)};
}

std::uint32_t ScrambleState::scramble(std::uint32_t digits, std::size_t dim) const {
  const auto key = static_cast<std::uint32_t>(derive_key(seed, dim) >> 32);
  return reverse_bits(lk_permute(reverse_bits(digits), key));
}

PointSet sobol_block(const SobolSpec& spec, const std::optional<ScrambleState>& scramble,
                     std::size_t n, std::uint64_t skip) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("sobol: n must be at least 1");
  constexpr std::uint64_t kRange = std::uint64_t{1} << kSobolBits;
  if (skip >= kRange || n > kRange - skip)
    throw CapacityError("sobol: requested indices exceed 2^32");

  const std::uint32_t mask = spec.bits == kSobolBits ? ~0u : ~((1u << (kSobolBits - spec.bits)) - 1u);
  PointSet points(n, spec.dimension);
  for (std::size_t j = 0; j < spec.dimension; ++j) {
    const auto& v = spec.table->directions(j);
    const std::uint64_t noise_key = scramble ? derive_key(scramble->seed ^ 0xa5a5a5a5ULL, j) : 0;

    std::uint32_t x = 0;
    for (auto i = static_cast<std::uint32_t>(skip), k = 0u; i != 0; i >>= 1, ++k)
      if (i & 1u) x ^= v[k];
    for (std::size_t r = 0; r < n; ++r) {
      const std::uint64_t index = skip + r;
      if (r > 0) {
        // Natural order: bits of index that flip between index-1 and index.
        std::uint64_t changed = (index - 1) ^ index;
        for (int k = 0; changed != 0; changed >>= 1, ++k)
          if (changed & 1u) x ^= v[k];
      }
      const std::uint32_t digits = x & mask;
      if (scramble) {
        const std::uint32_t s = scramble->scramble(digits, j) & mask;
        // Fill the digits below the retained precision with 20 hashed bits so
        // the largest value is 1 - 2^-52.
        const double fill_scale = std::ldexp(1.0, kSobolBits - spec.bits);
        const double noise =
            static_cast<double>(mix64(noise_key + index) >> 44) * 0x1p-20 * fill_scale;
        points(r, j) = (static_cast<double>(s) + noise) * 0x1p-32;
      } else {
        points(r, j) = static_cast<double>(digits) * 0x1p-32;
      }
    }
  }
  return points;
}

double van_der_corput(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("van_der_corput: index must be >= 1");
  std::uint64_t r = 0;
  for (int k = 0; k < 64; ++k, n >>= 1) r = (r << 1) | (n & 1u);
  return static_cast<double>(r >> 11) * 0x1p-53;
}

}  // namespace sqmc
