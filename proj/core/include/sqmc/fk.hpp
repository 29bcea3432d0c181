#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sqmc/matrix.hpp"
#include "sqmc/resample.hpp"

namespace sqmc {

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// A Feynman-Kac model written as deterministic functions of uniforms.
///
/// gamma0 maps u in [0,1]^d to a draw from M0; gamma maps (x_{t-1}, v) to a
/// draw from M_t(x_{t-1}, .). log_potential returns log G_t and may return
/// -inf, never NaN. At t = 0 `prev` is empty.
///
/// A model that exposes a projection Lambda (lambda_dimension() > 0) promises
/// that gamma and log_potential read x_{t-1} only through lambda(x_{t-1}).
///
/// Implementations must be immutable and reentrant.
class FeynmanKacModel {
 public:
  virtual ~FeynmanKacModel() = default;

  virtual std::size_t dimension() const = 0;
  /// Largest t the model has data for.
  virtual std::size_t horizon() const { return std::numeric_limits<std::size_t>::max(); }

  virtual void gamma0(std::span<const double> u, std::span<double> x) const = 0;
  virtual void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
                     std::span<double> x) const = 0;
  virtual double log_potential(std::size_t t, std::span<const double> prev,
                               std::span<const double> x) const = 0;

  virtual std::size_t lambda_dimension() const { return 0; }
  virtual void lambda(std::span<const double> x, std::span<double> out) const;
};

/// Scalar test function phi evaluated on particle states.
struct TestFunction {
  std::string name;
  std::function<double(std::span<const double>)> f;

  /// phi(x) = x(k), 0-based k, named "x<k+1>".
  static TestFunction component(std::size_t k);
};

struct NormalizedWeights {
  WeightVector weights;
  /// log of the mean unnormalized weight: logsumexp(log_w) - log N.
  double log_mean = 0.0;
};

/// Stable log-sum-exp normalization. Throws ParticleDeath(step) when every
/// entry is -inf; NaN entries are rejected with std::invalid_argument.
NormalizedWeights normalize_weights(std::span<const double> log_w, std::size_t step = 0);

/// log L_t^N from the per-step log mean weights.
double log_likelihood_estimate(std::span<const double> increments);

/// Particle cloud at time t, owned by one engine run.
struct ParticleSystem {
  std::size_t t = 0;
  RowMatrix states;
  std::vector<double> log_weights;
  WeightVector weights;
  std::vector<std::size_t> ancestors;
  std::vector<double> log_increments;

  std::size_t size() const { return states.rows(); }
  /// Normalizes log_weights into weights and appends log l_t.
  void reweight(std::size_t step);
  double estimate(const TestFunction& phi) const;
  double log_likelihood() const { return log_likelihood_estimate(log_increments); }
};

/// Output of one engine run; every per-t series has T+1 entries.
struct RunResult {
  std::string engine;
  std::uint64_t seed = 0;
  std::size_t particles = 0;
  std::vector<std::string> function_names;
  /// estimates[f][t] = sum_n W_t^n phi_f(X_t^n).
  std::vector<std::vector<double>> estimates;
  /// Cumulative log L_t^N.
  std::vector<double> log_likelihood;
  double wall_seconds = 0.0;
  /// Set for deterministic QMC runs, whose likelihood estimate is biased and
  /// which admit no variance estimate.
  bool deterministic = false;

  std::size_t steps() const { return log_likelihood.size(); }
};

/// Shared bookkeeping used by both engines to fill a RunResult.
class RunRecorder {
 public:
  RunRecorder(std::string engine, std::uint64_t seed, std::size_t particles,
              std::vector<TestFunction> functions, std::size_t horizon);

  void record(const ParticleSystem& ps);
  RunResult finish(double wall_seconds, bool deterministic = false) &&;

 private:
  std::vector<TestFunction> functions_;
  RunResult result_;
};

/// Default test-function list: the first state component.
std::vector<TestFunction> default_test_functions();

}  // namespace sqmc
