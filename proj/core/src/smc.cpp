#include "sqmc/smc.hpp"

#include <chrono>
#include <stdexcept>
#include <vector>

#include "sqmc/rng.hpp"

namespace sqmc {
namespace {

RowMatrix iid_uniforms(std::uint64_t seed, Stream purpose, std::size_t t, std::size_t n,
                       std::size_t d) {
  RowMatrix u(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto rng = CounterRng::keyed(seed, purpose, t, i);
    for (std::size_t k = 0; k < d; ++k) u(i, k) = rng.uniform(k);
  }
  return u;
}

}  // namespace

void SmcConfig::validate() const {
  if (particles < 2) throw std::invalid_argument("smc: need at least 2 particles");
}

RunResult run_smc(const FeynmanKacModel& model, const SmcConfig& cfg) {
  cfg.validate();
  return run_smc(model, cfg,
                 iid_uniforms(cfg.seed, Stream::initial, 0, cfg.particles, model.dimension()));
}

RunResult run_smc(const FeynmanKacModel& model, const SmcConfig& cfg,
                  const RowMatrix& initial_uniforms) {
  cfg.validate();
  if (cfg.horizon > model.horizon())
    throw std::invalid_argument("smc: horizon exceeds the model's data");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = cfg.particles;
  const std::size_t d = model.dimension();
  if (initial_uniforms.rows() != n || initial_uniforms.cols() != d)
    throw std::invalid_argument("smc: initial uniforms have the wrong shape");

  RunRecorder recorder("smc", cfg.seed, n, cfg.functions, cfg.horizon);
  ParticleSystem ps;
  ps.states = RowMatrix(n, d);
  ps.log_weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    model.gamma0(initial_uniforms.row(i), ps.states.row(i));
    ps.log_weights[i] = model.log_potential(0, {}, ps.states.row(i));
  }
  ps.reweight(0);
  recorder.record(ps);

  RowMatrix next(n, d);
  std::vector<double> v(d);
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    const auto resample_key = CounterRng::keyed(cfg.seed, Stream::resample, t).key();
    ps.ancestors = multinomial_ancestors(ps.weights, n, resample_key);
    for (std::size_t i = 0; i < n; ++i) {
      const auto rng = CounterRng::keyed(cfg.seed, Stream::propagate, t, i);
      for (std::size_t k = 0; k < d; ++k) v[k] = rng.uniform(k);
      const auto prev = ps.states.row(ps.ancestors[i]);
      model.gamma(t, prev, v, next.row(i));
      ps.log_weights[i] = model.log_potential(t, prev, next.row(i));
    }
    std::swap(ps.states, next);
    ps.t = t;
    ps.reweight(t);
    recorder.record(ps);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return std::move(recorder).finish(elapsed);
}

}  // namespace sqmc
