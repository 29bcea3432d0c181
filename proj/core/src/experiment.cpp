#include "sqmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sqmc/errors.hpp"
#include "sqmc/kalman.hpp"
#include "sqmc/rng.hpp"
#include "sqmc/smc.hpp"
#include "sqmc/sqmc.hpp"

namespace sqmc {
namespace {

using nlohmann::json;

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double sample_variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double ss = 0.0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(x.size() - 1);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(EngineKind k) { return k == EngineKind::smc ? "smc" : "sqmc"; }

std::string EngineSpec::label() const {
  std::string out(to_string(kind));
  out += '-';
  out += to_string(formalism);
  if (construction) {
    out += '-';
    out += to_string(*construction);
  }
  return out;
}

EngineSpec EngineSpec::parse(std::string_view label) {
  const auto parts = split(label, '-');
  if (parts.size() < 2 || parts.size() > 3)
    throw std::invalid_argument("engine label '" + std::string(label) +
                                "' must be <engine>-<formalism>[-<construction>]");
  EngineSpec spec;
  if (parts[0] == "smc") {
    spec.kind = EngineKind::smc;
  } else if (parts[0] == "sqmc") {
    spec.kind = EngineKind::sqmc;
  } else {
    throw std::invalid_argument("unknown engine '" + parts[0] + "'");
  }
  spec.formalism = parse_formalism(parts[1]);
  if (parts.size() == 3) spec.construction = parse_construction(parts[2]);
  return spec;
}

std::string_view to_string(ModelId id) {
  switch (id) {
    case ModelId::rare_event: return "rare_event";
    case ModelId::stoch_vol: return "stoch_vol";
    case ModelId::lingauss: return "lingauss";
    case ModelId::diffusion_sv: return "diffusion_sv";
  }
  return "unknown";
}

ModelId parse_model_id(std::string_view s) {
  for (const auto id : {ModelId::rare_event, ModelId::stoch_vol, ModelId::lingauss,
                        ModelId::diffusion_sv})
    if (s == to_string(id)) return id;
  throw std::invalid_argument("unknown model id '" + std::string(s) + "'");
}

std::string_view to_string(Quantity q) {
  return q == Quantity::filtering_mean ? "filtering_mean" : "log_likelihood";
}

Quantity parse_quantity(std::string_view s) {
  if (s == "filtering_mean") return Quantity::filtering_mean;
  if (s == "log_likelihood") return Quantity::log_likelihood;
  throw std::invalid_argument("unknown quantity '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const auto& m = j.at("model");
    cfg.model.id = parse_model_id(m.at("id").get<std::string>());
    read_opt(m, "phi", cfg.model.phi);
    read_opt(m, "dimension", cfg.model.dimension);
    read_opt(m, "alpha", cfg.model.alpha);
    read_opt(m, "M", cfg.model.steps);
    read_opt(m, "use_lambda", cfg.model.use_lambda);
    if (cfg.model.id == ModelId::stoch_vol) {
      read_opt(m, "mu", cfg.model.stoch_vol.mu);
      read_opt(m, "phi", cfg.model.stoch_vol.phi);
      read_opt(m, "sigma", cfg.model.stoch_vol.sigma);
    }
    read_opt(m, "kappa", cfg.model.diffusion.kappa);
    read_opt(m, "omega", cfg.model.diffusion.omega);
    read_opt(m, "mu_x", cfg.model.diffusion.mu_x);
    read_opt(m, "mu_y", cfg.model.diffusion.mu_y);
    read_opt(m, "beta", cfg.model.diffusion.beta);
    read_opt(m, "rho", cfg.model.diffusion.rho);

    read_opt(j, "T", cfg.horizon);
    read_opt(j, "replications", cfg.replications);
    read_opt(j, "seed", cfg.seed);
    read_opt(j, "workers", cfg.workers);
    if (j.contains("particles")) cfg.particles = j.at("particles").get<std::vector<std::size_t>>();
    if (j.contains("construction"))
      cfg.construction = parse_construction(j.at("construction").get<std::string>());
    if (j.contains("engines"))
      for (const auto& e : j.at("engines")) cfg.engines.push_back(EngineSpec::parse(e.get<std::string>()));
    if (j.contains("reference"))
      cfg.reference = EngineSpec::parse(j.at("reference").get<std::string>());
    if (j.contains("quantity")) cfg.quantity = parse_quantity(j.at("quantity").get<std::string>());
    if (j.contains("data")) {
      read_opt(j.at("data"), "seed", cfg.data_seed);
      read_opt(j.at("data"), "fine_grid", cfg.fine_steps);
    }
    if (j.contains("out")) cfg.output_dir = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (cfg.model.id == ModelId::diffusion_sv) {
    for (auto& e : cfg.engines)
      if (!e.construction) e.construction = cfg.construction;
    if (cfg.reference && !cfg.reference->construction) cfg.reference->construction = cfg.construction;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string ExperimentConfig::to_json() const {
  json m{{"id", std::string(sqmc::to_string(model.id))}};
  switch (model.id) {
    case ModelId::rare_event: m["phi"] = model.phi; break;
    case ModelId::stoch_vol:
      m["mu"] = model.stoch_vol.mu;
      m["phi"] = model.stoch_vol.phi;
      m["sigma"] = model.stoch_vol.sigma;
      break;
    case ModelId::lingauss:
      m["dimension"] = model.dimension;
      m["alpha"] = model.alpha;
      break;
    case ModelId::diffusion_sv:
      m["kappa"] = model.diffusion.kappa;
      m["omega"] = model.diffusion.omega;
      m["mu_x"] = model.diffusion.mu_x;
      m["mu_y"] = model.diffusion.mu_y;
      m["beta"] = model.diffusion.beta;
      m["rho"] = model.diffusion.rho;
      m["M"] = model.steps;
      m["use_lambda"] = model.use_lambda;
      break;
  }
  json engines = json::array();
  for (const auto& e : this->engines) engines.push_back(e.label());
  json j{{"model", m},
         {"T", horizon},
         {"particles", particles},
         {"replications", replications},
         {"seed", seed},
         {"engines", engines},
         {"reference", reference_engine().label()},
         {"quantity", std::string(sqmc::to_string(quantity))},
         {"construction", std::string(sqmc::to_string(construction))},
         {"data", {{"seed", data_seed}, {"fine_grid", fine_steps}}},
         {"out", output_dir.string()},
         {"workers", workers}};
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  if (engines.empty()) throw std::invalid_argument("config: no engines");
  if (particles.empty()) throw std::invalid_argument("config: no particle counts");
  if (replications < 2) throw std::invalid_argument("config: need at least 2 replications");
  for (const auto n : particles)
    if (n < 2) throw std::invalid_argument("config: particle counts must be >= 2");
  for (const auto& e : engines) {
    if (e.formalism == Formalism::guided && !model.has_guided())
      throw std::invalid_argument("config: engine " + e.label() + " does not apply to model " +
                                  std::string(sqmc::to_string(model.id)));
    if (e.construction && model.id != ModelId::diffusion_sv)
      throw std::invalid_argument("config: path construction only applies to diffusion_sv");
  }
  const auto ref = reference_engine();
  if (std::find(engines.begin(), engines.end(), ref) == engines.end())
    throw std::invalid_argument("config: reference engine " + ref.label() + " is not run");
  if (model.id == ModelId::lingauss && model.dimension == 0)
    throw std::invalid_argument("config: lingauss dimension must be positive");
  if (model.id == ModelId::diffusion_sv) {
    model.diffusion.validate();
    if (model.steps == 0) throw std::invalid_argument("config: M must be >= 1");
  }
  if (model.id == ModelId::stoch_vol) model.stoch_vol.validate();
}

EngineSpec ExperimentConfig::reference_engine() const {
  if (reference) return *reference;
  if (engines.empty()) throw std::invalid_argument("config: no engines");
  return engines.front();
}

// ---------------------------------------------------------------------------

Dataset simulate_dataset(const ModelSpec& model, std::size_t horizon, std::uint64_t seed,
                         std::size_t fine_steps) {
  Dataset data;
  data.model = model.id;
  switch (model.id) {
    case ModelId::rare_event:
      data.observations = RowMatrix(horizon + 1, 1, 1.0);
      break;
    case ModelId::stoch_vol: {
      const auto sim = simulate_stoch_vol(model.stoch_vol, horizon, seed);
      data.observations = RowMatrix(horizon + 1, 1);
      data.states = RowMatrix(horizon + 1, 1);
      for (std::size_t t = 0; t <= horizon; ++t) {
        data.observations(t, 0) = sim.observations[t];
        data.states(t, 0) = sim.states[t];
      }
      break;
    }
    case ModelId::lingauss: {
      auto sim = simulate_lingauss(model.dimension, model.alpha, horizon, seed);
      data.observations = std::move(sim.observations);
      data.states = std::move(sim.states);
      break;
    }
    case ModelId::diffusion_sv: {
      const auto sim = simulate_diffusion_sv(model.diffusion, horizon, fine_steps, seed);
      data.observations = RowMatrix(horizon + 1, 1);
      data.states = RowMatrix(horizon + 1, 1);
      for (std::size_t t = 0; t <= horizon; ++t) {
        data.observations(t, 0) = sim.observations[t];
        data.states(t, 0) = sim.states[t];
      }
      break;
    }
  }
  return data;
}

std::unique_ptr<FeynmanKacModel> make_model(const ModelSpec& model, const Dataset& data,
                                            const EngineSpec& engine) {
  const auto column = [&] { return data.observations.column(0); };
  switch (model.id) {
    case ModelId::rare_event:
      if (engine.formalism == Formalism::guided)
        return std::make_unique<Ar1RareEventGuided>(model.phi);
      return std::make_unique<Ar1RareEventModel>(model.phi);
    case ModelId::stoch_vol:
      return std::make_unique<StochVolModel>(model.stoch_vol, column(), engine.formalism);
    case ModelId::lingauss:
      return std::make_unique<LinGaussModel>(model.dimension, model.alpha, data.observations,
                                             engine.formalism);
    case ModelId::diffusion_sv:
      if (engine.formalism != Formalism::bootstrap)
        throw std::invalid_argument("diffusion_sv only has the bootstrap formalism");
      return std::make_unique<DiffusionSVModel>(
          model.diffusion, column(),
          PathSpec{model.steps, engine.construction.value_or(PathConstruction::forward)});
  }
  throw std::invalid_argument("unknown model");
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t replication) {
  return derive_key(derive_key(master, static_cast<std::uint64_t>(Stream::replication)),
                    replication);
}

std::string RunRow::engine_label() const {
  std::string out = engine + "-" + formalism;
  if (construction != "none") out += "-" + construction;
  return out;
}

// ---------------------------------------------------------------------------

RunArchive run_replications(const ExperimentConfig& cfg, const Dataset& data,
                            const std::vector<std::size_t>* execution_order) {
  cfg.validate();
  struct Task {
    std::size_t engine;
    std::size_t particles;
    std::size_t replication;
  };
  std::vector<Task> tasks;
  for (std::size_t e = 0; e < cfg.engines.size(); ++e)
    for (const auto n : cfg.particles)
      for (std::size_t r = 0; r < cfg.replications; ++r) tasks.push_back({e, n, r});

  std::vector<std::size_t> schedule(tasks.size());
  std::iota(schedule.begin(), schedule.end(), std::size_t{0});
  if (execution_order) {
    if (execution_order->size() != tasks.size())
      throw std::invalid_argument("run_replications: execution order has the wrong size");
    schedule = *execution_order;
  }

  std::vector<std::unique_ptr<FeynmanKacModel>> models;
  for (const auto& e : cfg.engines) models.push_back(make_model(cfg.model, data, e));

  struct Outcome {
    std::optional<RunResult> result;
    std::string error;
  };
  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < schedule.size(); k = next++) {
      const std::size_t index = schedule[k];
      const Task& task = tasks[index];
      const auto& engine = cfg.engines[task.engine];
      const auto& model = *models[task.engine];
      const std::uint64_t seed = replication_seed(cfg.seed, task.replication);
      try {
        if (engine.kind == EngineKind::smc) {
          SmcConfig sc;
          sc.particles = task.particles;
          sc.horizon = cfg.horizon;
          sc.seed = seed;
          outcomes[index].result = run_smc(model, sc);
        } else {
          SqmcConfig qc;
          qc.particles = task.particles;
          qc.horizon = cfg.horizon;
          qc.seed = seed;
          qc.use_lambda = cfg.model.id == ModelId::diffusion_sv && cfg.model.use_lambda;
          outcomes[index].result = run_sqmc(model, qc);
        }
      } catch (const ParticleDeath& e) {
        outcomes[index].error = e.what();
      } catch (const NumericError& e) {
        outcomes[index].error = e.what();
      }
    }
  };
  std::size_t workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, tasks.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  RunArchive archive;
  const std::size_t m = cfg.model.id == ModelId::diffusion_sv ? cfg.model.steps : 0;
  for (std::size_t index = 0; index < tasks.size(); ++index) {
    const Task& task = tasks[index];
    const auto& engine = cfg.engines[task.engine];
    const auto& outcome = outcomes[index];
    if (!outcome.result) {
      archive.failures.push_back({engine.label(), task.particles, task.replication, outcome.error});
      continue;
    }
    const RunResult& run = *outcome.result;
    for (std::size_t t = 0; t < run.steps(); ++t) {
      RunRow row;
      row.model = std::string(to_string(cfg.model.id));
      row.engine = std::string(to_string(engine.kind));
      row.formalism = std::string(to_string(engine.formalism));
      row.construction = engine.construction ? std::string(to_string(*engine.construction)) : "none";
      row.particles = task.particles;
      row.steps = m;
      row.horizon = cfg.horizon;
      row.t = t;
      row.replication = task.replication;
      row.estimate_mean_x1 = run.estimates.at(0).at(t);
      row.log_likelihood = run.log_likelihood.at(t);
      archive.rows.push_back(std::move(row));
    }
  }
  return archive;
}

std::optional<std::vector<double>> oracle_truth(const ModelSpec& model, const Dataset& data,
                                                Quantity quantity) {
  if (!model.has_kalman_oracle()) return std::nullopt;
  const auto states = kalman_filter(lingauss_transition_matrix(model.dimension, model.alpha),
                                    data.observations);
  std::vector<double> truth;
  for (const auto& s : states)
    truth.push_back(quantity == Quantity::filtering_mean ? s.mean(0) : s.log_likelihood);
  return truth;
}

GainTable compute_gains(const std::vector<RunRow>& rows, const std::string& reference_label,
                        Quantity quantity, const std::optional<std::vector<double>>& truth) {
  GainTable table;
  table.metric = truth ? "mse_vs_kalman" : "mse_vs_pooled_mean";
  table.quantity = quantity;
  table.reference = reference_label;

  const auto value = [&](const RunRow& r) {
    return quantity == Quantity::filtering_mean ? r.estimate_mean_x1 : r.log_likelihood;
  };
  // (engine, N, t) -> values over replications; std::map keeps output ordered.
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> groups;
  std::map<std::size_t, std::pair<double, std::size_t>> pooled;
  std::string model;
  for (const auto& r : rows) {
    model = r.model;
    groups[{r.engine_label(), r.particles, r.t}].push_back(value(r));
    auto& p = pooled[r.t];
    p.first += value(r);
    p.second += 1;
  }

  std::map<std::pair<std::size_t, std::size_t>, double> reference_mse;
  std::vector<GainRow> out;
  for (const auto& [key, values] : groups) {
    const auto& [engine, n, t] = key;
    double target;
    if (truth) {
      if (t >= truth->size()) throw std::invalid_argument("compute_gains: truth series too short");
      target = (*truth)[t];
    } else {
      target = pooled[t].first / static_cast<double>(pooled[t].second);
    }
    double mse = 0.0;
    for (const double v : values) mse += (v - target) * (v - target);
    mse /= static_cast<double>(values.size());
    GainRow row{model, engine, n, t, mse, sample_variance(values), 1.0, false};
    row.degenerate = values.size() < 2 || row.variance == 0.0;
    if (engine == reference_label) reference_mse[{n, t}] = mse;
    out.push_back(std::move(row));
  }
  for (auto& row : out) {
    const auto it = reference_mse.find({row.particles, row.t});
    if (it == reference_mse.end())
      throw std::invalid_argument("compute_gains: reference engine " + reference_label +
                                  " has no runs at N=" + std::to_string(row.particles));
    if (row.engine == reference_label) {
      row.gain = 1.0;
    } else if (row.mse == 0.0) {
      row.gain = std::numeric_limits<double>::infinity();
      row.degenerate = true;
    } else {
      row.gain = it->second / row.mse;
    }
  }
  table.rows = std::move(out);
  return table;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<GainSummary> summarize_gains(const GainTable& table) {
  std::map<std::pair<std::string, std::size_t>, std::vector<double>> groups;
  for (const auto& row : table.rows) groups[{row.engine, row.particles}].push_back(row.gain);
  std::vector<GainSummary> out;
  for (const auto& [key, gains] : groups)
    out.push_back({key.first, key.second, median(gains), quantile(gains, 0.25), quantile(gains, 0.75)});
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data) {
  ExperimentResult result;
  result.archive = run_replications(cfg, data);
  result.gains = compute_gains(result.archive.rows, cfg.reference_engine().label(), cfg.quantity,
                               oracle_truth(cfg.model, data, cfg.quantity));
  return result;
}

}  // namespace sqmc
