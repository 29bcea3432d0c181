#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sqmc/fk.hpp"

namespace sqmc {

struct SmcConfig {
  std::size_t particles = 1024;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<TestFunction> functions = default_test_functions();

  /// Throws std::invalid_argument unless N >= 2.
  void validate() const;
};

/// Generic SMC sampler: multinomial resampling at every step, IID uniforms
/// drawn from counter-based streams keyed by (seed, t, n, purpose).
/// Particle death propagates as ParticleDeath carrying the time index.
RunResult run_smc(const FeynmanKacModel& model, const SmcConfig& cfg);

/// Same run, initialized from an explicit matrix of initial uniforms (one row
/// per particle). Used to check exchangeability.
RunResult run_smc(const FeynmanKacModel& model, const SmcConfig& cfg,
                  const RowMatrix& initial_uniforms);

}  // namespace sqmc
