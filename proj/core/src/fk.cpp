#include "sqmc/fk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sqmc/errors.hpp"

namespace sqmc {

void FeynmanKacModel::lambda(std::span<const double>, std::span<double>) const {
  throw std::logic_error("model does not expose a Lambda projection");
}

TestFunction TestFunction::component(std::size_t k) {
  return {"x" + std::to_string(k + 1), [k](std::span<const double> x) { return x[k]; }};
}

std::vector<TestFunction> default_test_functions() { return {TestFunction::component(0)}; }

NormalizedWeights normalize_weights(std::span<const double> log_w, std::size_t step) {
  if (log_w.empty()) throw std::invalid_argument("normalize_weights: empty input");
  double max = kLogZero;
  for (const double lw : log_w) {
    if (std::isnan(lw)) throw std::invalid_argument("normalize_weights: NaN log weight");
    max = std::max(max, lw);
  }
  if (max == kLogZero) throw ParticleDeath(step);
  if (!std::isfinite(max)) throw std::invalid_argument("normalize_weights: +inf log weight");

  std::vector<double> w(log_w.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < log_w.size(); ++n) {
    w[n] = std::exp(log_w[n] - max);
    sum += w[n];
  }
  for (double& x : w) x /= sum;
  const double log_mean = max + std::log(sum) - std::log(static_cast<double>(log_w.size()));
  return {WeightVector(std::move(w)), log_mean};
}

double log_likelihood_estimate(std::span<const double> increments) {
  if (increments.empty()) throw std::invalid_argument("log_likelihood_estimate: no increments");
  double total = 0.0;
  for (const double x : increments) total += x;
  return total;
}

void ParticleSystem::reweight(std::size_t step) {
  auto normalized = normalize_weights(log_weights, step);
  weights = std::move(normalized.weights);
  log_increments.push_back(normalized.log_mean);
}

double ParticleSystem::estimate(const TestFunction& phi) const {
  double total = 0.0;
  for (std::size_t n = 0; n < size(); ++n)
    if (weights[n] > 0.0) total += weights[n] * phi.f(states.row(n));
  return total;
}

RunRecorder::RunRecorder(std::string engine, std::uint64_t seed, std::size_t particles,
                         std::vector<TestFunction> functions, std::size_t horizon)
    : functions_(std::move(functions)) {
  result_.engine = std::move(engine);
  result_.seed = seed;
  result_.particles = particles;
  result_.estimates.resize(functions_.size());
  for (auto& e : result_.estimates) e.reserve(horizon + 1);
  for (const auto& f : functions_) result_.function_names.push_back(f.name);
  result_.log_likelihood.reserve(horizon + 1);
}

void RunRecorder::record(const ParticleSystem& ps) {
  for (std::size_t f = 0; f < functions_.size(); ++f)
    result_.estimates[f].push_back(ps.estimate(functions_[f]));
  result_.log_likelihood.push_back(ps.log_likelihood());
}

RunResult RunRecorder::finish(double wall_seconds, bool deterministic) && {
  result_.wall_seconds = wall_seconds;
  result_.deterministic = deterministic;
  return std::move(result_);
}

}  // namespace sqmc
