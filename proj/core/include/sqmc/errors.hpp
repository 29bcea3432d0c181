#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqmc {

/// A request exceeds a fixed table or key width (Sobol dimension, Hilbert bits).
class CapacityError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Every particle received zero weight at step `step()`.
class ParticleDeath : public std::runtime_error {
 public:
  explicit ParticleDeath(std::size_t step)
      : std::runtime_error("particle death: all weights are zero at t=" + std::to_string(step)),
        step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Overflow or a non-finite value inside a model computation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sqmc
