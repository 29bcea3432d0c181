#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <vector>

#include "sqmc/matrix.hpp"

namespace sqmc {

/// N x s block of points in [0,1)^s, one point per row.
using PointSet = RowMatrix;

inline constexpr int kSobolBits = 32;

/// Per-dimension binary direction integers of a Sobol generator.
///
/// Text format, one line per dimension (lines starting with '#' are ignored):
///
///     dimension degree polynomial_code m_1 ... m_degree
///
/// `polynomial_code` holds the interior coefficients of the primitive
/// polynomial (the leading and constant terms are implicit), and m_k are the
/// odd initial direction integers with m_k < 2^k. Dimension 1 has degree 0
/// and yields the Van der Corput sequence.
class SobolTable {
 public:
  using Directions = std::array<std::uint32_t, kSobolBits>;

  static SobolTable parse(std::istream& in);
  /// The table compiled into the library (Joe-Kuo, 1111 dimensions).
  static std::shared_ptr<const SobolTable> bundled();

  std::size_t max_dimension() const { return directions_.size(); }
  /// Directions of dimension j (0-based). v[k] carries the bit for 2^-(k+1).
  const Directions& directions(std::size_t j) const;

 private:
  std::vector<Directions> directions_;
};

struct SobolSpec {
  std::size_t dimension = 1;
  int bits = kSobolBits;
  std::shared_ptr<const SobolTable> table = SobolTable::bundled();

  /// Throws CapacityError when the table is too small, std::invalid_argument
  /// on a zero dimension or bits outside [1, 32].
  void validate() const;
};

/// Seed of a hash-based nested uniform (Owen) scramble. Each dimension gets
/// its own key derived from the seed.
struct ScrambleState {
  std::uint64_t seed = 0;

  /// Fresh state for time step t of a run with the given master seed.
  static ScrambleState for_step(std::uint64_t master_seed, std::uint64_t t);

  /// Scrambles the leading 32 binary digits of a point coordinate. Digit k of
  /// the output is digit k of the input flipped by a keyed hash of digits
  /// 1..k-1, which is the defining structure of a nested scramble.
  std::uint32_t scramble(std::uint32_t digits, std::size_t dim) const;
};

/// Rows skip .. skip+n-1 of the Sobol sequence (natural ordering, row 0 is the
/// origin), optionally scrambled. Scrambled coordinates are completed below
/// the 32nd digit with hashed noise so that every point is uniform on [0,1).
PointSet sobol_block(const SobolSpec& spec, const std::optional<ScrambleState>& scramble,
                     std::size_t n, std::uint64_t skip = 0);

/// Base-2 radical inverse of n >= 1.
double van_der_corput(std::uint64_t n);

}  // namespace sqmc
