#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sqmc/brownian.hpp"
#include "sqmc/fk.hpp"
#include "sqmc/matrix.hpp"
#include "sqmc/models.hpp"

namespace sqmc {

enum class EngineKind { smc, sqmc };

/// One algorithm of an experiment, written "<engine>-<formalism>[-<construction>]",
/// e.g. "smc-guided" or "sqmc-bootstrap-bridge".
struct EngineSpec {
  EngineKind kind = EngineKind::smc;
  Formalism formalism = Formalism::bootstrap;
  std::optional<PathConstruction> construction;

  std::string label() const;
  static EngineSpec parse(std::string_view label);
  bool operator==(const EngineSpec&) const = default;
};

std::string_view to_string(EngineKind k);

enum class ModelId { rare_event, stoch_vol, lingauss, diffusion_sv };

std::string_view to_string(ModelId id);
ModelId parse_model_id(std::string_view s);

struct ModelSpec {
  ModelId id = ModelId::lingauss;
  double phi = 0.0;                 // rare_event
  StochVolParams stoch_vol;         // stoch_vol
  std::size_t dimension = 1;        // lingauss
  double alpha = 0.4;               // lingauss
  DiffusionSVParams diffusion;      // diffusion_sv
  std::size_t steps = 5;            // diffusion_sv: M
  bool use_lambda = true;           // diffusion_sv: order ancestors by x(M)

  bool has_guided() const { return id != ModelId::diffusion_sv; }
  bool has_kalman_oracle() const { return id == ModelId::lingauss; }
};

/// What the gain table compares.
enum class Quantity { filtering_mean, log_likelihood };

std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view s);

/// Experiment configuration, stored as a JSON document:
///
///     {
///       "model": {"id": "lingauss", "dimension": 5, "alpha": 0.4},
///       "T": 50,
///       "particles": [4096],
///       "replications": 50,
///       "seed": 1,
///       "engines": ["smc-guided", "sqmc-guided"],
///       "reference": "smc-guided",
///       "quantity": "filtering_mean",
///       "data": {"seed": 7, "fine_grid": 200},
///       "out": "results",
///       "workers": 0
///     }
///
/// Model ids and their parameters: "rare_event" {phi}; "stoch_vol" {mu, phi,
/// sigma}; "lingauss" {dimension, alpha}; "diffusion_sv" {kappa, omega, mu_x,
/// mu_y, beta, rho, M, use_lambda}. Diffusion engines without a construction
/// suffix take "construction" (default "bridge").
struct ExperimentConfig {
  ModelSpec model;
  std::vector<EngineSpec> engines;
  std::vector<std::size_t> particles;
  std::size_t horizon = 50;
  std::size_t replications = 50;
  std::uint64_t seed = 1;
  std::optional<EngineSpec> reference;
  Quantity quantity = Quantity::filtering_mean;
  std::uint64_t data_seed = 7;
  std::size_t fine_steps = 200;
  PathConstruction construction = PathConstruction::bridge;
  std::filesystem::path output_dir = "results";
  /// 0 means one worker per hardware thread.
  std::size_t workers = 0;

  static ExperimentConfig from_json(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;

  /// Throws std::invalid_argument on an empty engine or particle list, an
  /// engine that does not apply to the model, or R < 2.
  void validate() const;
  EngineSpec reference_engine() const;
};

/// Observations, one row per time step 0..T. Rare-event data is y_t = 1.
struct Dataset {
  ModelId model = ModelId::lingauss;
  RowMatrix observations;
  /// Latent states at integer times when known (simulated data).
  RowMatrix states;
};

Dataset simulate_dataset(const ModelSpec& model, std::size_t horizon, std::uint64_t seed,
                         std::size_t fine_steps);

std::unique_ptr<FeynmanKacModel> make_model(const ModelSpec& model, const Dataset& data,
                                            const EngineSpec& engine);

/// Seed of replication r, independent of engine and particle count.
std::uint64_t replication_seed(std::uint64_t master, std::size_t replication);

/// One line of the run archive.
struct RunRow {
  std::string model;
  std::string engine;
  std::string formalism;
  std::string construction;
  std::size_t particles = 0;
  std::size_t steps = 0;
  std::size_t horizon = 0;
  std::size_t t = 0;
  std::size_t replication = 0;
  double estimate_mean_x1 = 0.0;
  double log_likelihood = 0.0;

  /// "<engine>-<formalism>[-<construction>]".
  std::string engine_label() const;
  bool operator==(const RunRow&) const = default;
};

struct RunFailure {
  std::string engine;
  std::size_t particles = 0;
  std::size_t replication = 0;
  std::string message;
};

struct RunArchive {
  std::vector<RunRow> rows;
  std::vector<RunFailure> failures;
};

/// Runs every (engine, N, replication) task on up to cfg.workers threads.
/// Rows are ordered by (engine, N, replication, t) whatever the execution
/// order. `execution_order`, when given, is a permutation of task indices
/// used to schedule work (for testing order independence).
RunArchive run_replications(const ExperimentConfig& cfg, const Dataset& data,
                            const std::vector<std::size_t>* execution_order = nullptr);

struct GainRow {
  std::string model;
  std::string engine;
  std::size_t particles = 0;
  std::size_t t = 0;
  /// Mean squared error against the oracle, or against the pooled mean of
  /// all runs at this t when there is no oracle.
  double mse = 0.0;
  /// Sample variance across replications.
  double variance = 0.0;
  /// mse of the reference engine at the same N divided by this mse.
  double gain = 1.0;
  /// Zero spread across replications: the gain is not meaningful.
  bool degenerate = false;

  bool operator==(const GainRow&) const = default;
};

struct GainTable {
  /// "mse_vs_kalman" or "mse_vs_pooled_mean".
  std::string metric;
  Quantity quantity = Quantity::filtering_mean;
  std::string reference;
  std::vector<GainRow> rows;
};

/// Exact per-t truth for the chosen quantity, when the model has an oracle.
std::optional<std::vector<double>> oracle_truth(const ModelSpec& model, const Dataset& data,
                                                Quantity quantity);

GainTable compute_gains(const std::vector<RunRow>& rows, const std::string& reference_label,
                        Quantity quantity, const std::optional<std::vector<double>>& truth);

struct GainSummary {
  std::string engine;
  std::size_t particles = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Median and quartiles of the per-t gains for each (engine, N).
std::vector<GainSummary> summarize_gains(const GainTable& table);

struct ExperimentResult {
  RunArchive archive;
  GainTable gains;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const Dataset& data);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace sqmc
