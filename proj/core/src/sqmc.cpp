#include "sqmc/sqmc.hpp"

#include <chrono>
#include <stdexcept>

#include "sqmc/hilbert.hpp"

namespace sqmc {

void SqmcConfig::validate() const {
  if (particles < 2) throw std::invalid_argument("sqmc: need at least 2 particles");
  if (!table) throw std::invalid_argument("sqmc: no Sobol direction table");
}

std::vector<std::size_t> sqmc_ordering(const FeynmanKacModel& model, const RowMatrix& states,
                                       bool use_lambda, std::optional<unsigned> hilbert_bits) {
  const RowMatrix* space = &states;
  RowMatrix projected;
  if (use_lambda) {
    const std::size_t k = model.lambda_dimension();
    if (k == 0) throw std::invalid_argument("sqmc: use_lambda requested but the model has no Lambda");
    projected = RowMatrix(states.rows(), k);
    for (std::size_t i = 0; i < states.rows(); ++i) model.lambda(states.row(i), projected.row(i));
    space = &projected;
  }
  const std::size_t dim = space->cols();
  if (dim == 1) return stable_argsort(space->column(0));
  HilbertConfig hcfg = HilbertConfig::with_default_bits(dim);
  if (hilbert_bits) hcfg.bits_per_axis = *hilbert_bits;
  return hilbert_sort_permutation(*space, PsiTransform::fit(*space), hcfg);
}

RunResult run_sqmc(const FeynmanKacModel& model, const SqmcConfig& cfg) {
  cfg.validate();
  if (cfg.horizon > model.horizon())
    throw std::invalid_argument("sqmc: horizon exceeds the model's data");
  if (cfg.use_lambda && model.lambda_dimension() == 0)
    throw std::invalid_argument("sqmc: use_lambda requested but the model has no Lambda");
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = cfg.particles;
  const std::size_t d = model.dimension();

  auto scramble_for = [&](std::size_t t) -> std::optional<ScrambleState> {
    if (!cfg.scrambled) return std::nullopt;
    return ScrambleState::for_step(cfg.seed, t);
  };

  RunRecorder recorder(cfg.scrambled ? "sqmc" : "qmc", cfg.seed, n, cfg.functions, cfg.horizon);
  ParticleSystem ps;
  ps.states = RowMatrix(n, d);
  ps.log_weights.resize(n);
  {
    const PointSet u0 = sobol_block({d, kSobolBits, cfg.table}, scramble_for(0), n);
    for (std::size_t i = 0; i < n; ++i) {
      model.gamma0(u0.row(i), ps.states.row(i));
      ps.log_weights[i] = model.log_potential(0, {}, ps.states.row(i));
    }
  }
  ps.reweight(0);
  recorder.record(ps);

  const SobolSpec step_spec{d + 1, kSobolBits, cfg.table};
  RowMatrix next(n, d);
  std::vector<double> u_sorted(n);
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    const PointSet points = sobol_block(step_spec, scramble_for(t), n);
    const auto rank = stable_argsort(points.column(0));
    for (std::size_t k = 0; k < n; ++k) u_sorted[k] = points(rank[k], 0);

    const auto order = sqmc_ordering(model, ps.states, cfg.use_lambda, cfg.hilbert_bits);
    const auto labels = sorted_ancestors_by_state(u_sorted, ps.weights, order);

    // The point whose first coordinate has rank k takes the k-th ancestor and
    // keeps its own remaining d coordinates.
    ps.ancestors.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = rank[k];
      const auto prev = ps.states.row(labels[k]);
      model.gamma(t, prev, points.row(i).subspan(1), next.row(i));
      ps.log_weights[i] = model.log_potential(t, prev, next.row(i));
      ps.ancestors[i] = labels[k];
    }
    std::swap(ps.states, next);
    ps.t = t;
    ps.reweight(t);
    recorder.record(ps);
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return std::move(recorder).finish(elapsed, !cfg.scrambled);
}

}  // namespace sqmc
