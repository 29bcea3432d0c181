#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "sqmc/fk.hpp"
#include "sqmc/lowdisc.hpp"

namespace sqmc {

struct SqmcConfig {
  std::size_t particles = 1024;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  /// Nested scrambling of each step's point set. Unscrambled runs are
  /// deterministic and flagged as such in the RunResult.
  bool scrambled = true;
  /// Bits per axis of the Hilbert grid; floor(62/k) when unset.
  std::optional<unsigned> hilbert_bits;
  /// Order ancestors by the model's Lambda projection instead of the state.
  bool use_lambda = false;
  std::shared_ptr<const SobolTable> table = SobolTable::bundled();
  std::vector<TestFunction> functions = default_test_functions();

  void validate() const;
};

/// Sequential quasi-Monte Carlo. At each t >= 1 a fresh (d+1)-dimensional
/// Sobol block is drawn; its first column, sorted, selects ancestors by
/// inverse CDF over the particles in Hilbert order (scalar order when the
/// ordering space is one-dimensional); the remaining d columns of the same
/// row drive gamma.
RunResult run_sqmc(const FeynmanKacModel& model, const SqmcConfig& cfg);

/// Ancestor ordering used at one step: Lambda(x) rows when requested,
/// otherwise the states themselves. Exposed for tests.
std::vector<std::size_t> sqmc_ordering(const FeynmanKacModel& model, const RowMatrix& states,
                                       bool use_lambda, std::optional<unsigned> hilbert_bits);

}  // namespace sqmc
