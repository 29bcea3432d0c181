#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sqmc/brownian.hpp"
#include "sqmc/fk.hpp"
#include "sqmc/matrix.hpp"

namespace sqmc {

enum class Formalism { bootstrap, guided };

std::string_view to_string(Formalism f);
Formalism parse_formalism(std::string_view s);

/// Draw from N(mean, 1) truncated to [0, inf) by inverse CDF; increasing in u.
double truncated_normal_positive(double mean, double u);

// ---------------------------------------------------------------------------
// AR(1) rare event: X_0 ~ N(0,1), X_t = phi X_{t-1} + V_t, potential 1{x_t >= 0}.

class Ar1RareEventModel final : public FeynmanKacModel {
 public:
  explicit Ar1RareEventModel(double phi);

  std::size_t dimension() const override { return 1; }
  void gamma0(std::span<const double> u, std::span<double> x) const override;
  void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
             std::span<double> x) const override;
  double log_potential(std::size_t t, std::span<const double> prev,
                       std::span<const double> x) const override;

 private:
  double phi_;
};

/// Same target, proposing from N(phi x_{t-1}, 1) truncated to R+ with
/// potential Phi(phi x_{t-1}) (Phi(0) at t = 0).
class Ar1RareEventGuided final : public FeynmanKacModel {
 public:
  explicit Ar1RareEventGuided(double phi);

  std::size_t dimension() const override { return 1; }
  void gamma0(std::span<const double> u, std::span<double> x) const override;
  void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
             std::span<double> x) const override;
  double log_potential(std::size_t t, std::span<const double> prev,
                       std::span<const double> x) const override;

  /// log m_t(x | prev); prev empty for t = 0.
  double proposal_logpdf(std::span<const double> prev, double x) const;

 private:
  double phi_;
};

// ---------------------------------------------------------------------------
// Stochastic volatility: X_t - mu = phi (X_{t-1} - mu) + sigma V_t,
// Y_t | X_t ~ N(0, exp(X_t)).

struct StochVolParams {
  double mu = -1.0;
  double phi = 0.95;
  double sigma = 0.3;

  void validate() const;
};

struct StochVolData {
  std::vector<double> states;
  std::vector<double> observations;
};

StochVolData simulate_stoch_vol(const StochVolParams& p, std::size_t horizon, std::uint64_t seed);

/// The guided variant proposes from the Gaussian obtained by linearizing
/// exp(-x_t) around the prior mean m = mu + phi (x_{t-1} - mu):
/// N(m + sigma^2/2 (y_t^2 e^{-m} - 1), sigma^2).
class StochVolModel final : public FeynmanKacModel {
 public:
  StochVolModel(StochVolParams params, std::vector<double> observations, Formalism formalism);

  std::size_t dimension() const override { return 1; }
  std::size_t horizon() const override { return y_.size() - 1; }
  void gamma0(std::span<const double> u, std::span<double> x) const override;
  void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
             std::span<double> x) const override;
  double log_potential(std::size_t t, std::span<const double> prev,
                       std::span<const double> x) const override;

  /// Mean of the guided proposal at step t.
  double guided_mean(std::size_t t, double prev) const;
  /// log m_t(x | prev) for the configured formalism.
  double proposal_logpdf(std::size_t t, double prev, double x) const;

 private:
  StochVolParams p_;
  std::vector<double> y_;
  Formalism formalism_;
};

// ---------------------------------------------------------------------------
// Linear Gaussian: X_0 ~ N_d(0, I), X_t = F X_{t-1} + V_t, Y_t = X_t + W_t,
// F = (alpha^{|i-j|}), unit noises.

std::vector<double> lingauss_transition(std::size_t dimension, double alpha);

struct LinGaussData {
  RowMatrix states;
  RowMatrix observations;
};

LinGaussData simulate_lingauss(std::size_t dimension, double alpha, std::size_t horizon,
                               std::uint64_t seed);

/// The guided variant uses the optimal kernel N_d((y_t + F x)/2, I/2) with
/// potential N_d(y_t; F x, 2I) (at t = 0: N_d(y_0/2, I/2), N_d(y_0; 0, 2I)).
class LinGaussModel final : public FeynmanKacModel {
 public:
  LinGaussModel(std::size_t dimension, double alpha, RowMatrix observations, Formalism formalism);

  std::size_t dimension() const override { return d_; }
  std::size_t horizon() const override { return y_.rows() - 1; }
  void gamma0(std::span<const double> u, std::span<double> x) const override;
  void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
             std::span<double> x) const override;
  double log_potential(std::size_t t, std::span<const double> prev,
                       std::span<const double> x) const override;

  const std::vector<double>& transition() const { return f_; }
  const RowMatrix& observations() const { return y_; }
  double alpha() const { return alpha_; }

 private:
  void apply_f(std::span<const double> x, std::span<double> out) const;

  std::size_t d_;
  double alpha_;
  std::vector<double> f_;
  RowMatrix y_;
  Formalism formalism_;
};

// ---------------------------------------------------------------------------
// Diffusion-driven stochastic volatility on an Euler grid of M steps per unit
// time:
//   dX = {kappa (mu_x - e^X) e^{-X} - omega^2 e^{-X} / 2} dt + omega e^{-X/2} dW^X
//   Y_{t+1} - Y_t = int (mu_y + beta e^X) ds + int e^{X/2} dW^Y,  corr(W^X, W^Y) = rho.

struct DiffusionSVParams {
  double kappa = 0.02;
  double omega = 0.1;
  double mu_x = 0.8;
  double mu_y = 0.0;
  double beta = 0.0;
  double rho = -0.4;

  double drift(double x) const;
  double volatility(double x) const;
  /// Variance omega^2 / (2 kappa) of the initial law; 0 when omega == 0.
  double initial_variance() const;
  /// kappa > 0, omega > 0, |rho| < 1.
  void validate() const;
};

/// Euler recursion of one unit interval started at x_prev_last. Throws
/// NumericError when exp(-x) overflows or a state becomes non-finite.
void euler_propagate(const DiffusionSVParams& p, double x_prev_last,
                     std::span<const double> increments, std::span<double> out);

/// log density of y given y_prev and the path x over one unit interval driven
/// by `increments`. Throws std::invalid_argument for |rho| >= 1.
double diffusion_log_potential(const DiffusionSVParams& p, std::span<const double> x, double y_prev,
                               double y, std::span<const double> increments);

struct DiffusionSVData {
  /// Log-volatility at integer times 0..T.
  std::vector<double> states;
  /// Y_0 = 0, Y_1, ..., Y_T.
  std::vector<double> observations;
};

/// Simulates on a fine grid of `fine_steps` Euler steps per unit time and
/// records Y at integer times. Accepts kappa = 0 and omega = 0.
DiffusionSVData simulate_diffusion_sv(const DiffusionSVParams& p, std::size_t horizon,
                                      std::size_t fine_steps, std::uint64_t seed);

/// State X_t in R^M holds the path at the M grid points of (t-1, t]; X_0 is
/// the initial draw repeated. Lambda(x) = x(M).
class DiffusionSVModel final : public FeynmanKacModel {
 public:
  DiffusionSVModel(DiffusionSVParams params, std::vector<double> observations, PathSpec path);

  std::size_t dimension() const override { return path_.steps; }
  std::size_t horizon() const override { return y_.size() - 1; }
  void gamma0(std::span<const double> u, std::span<double> x) const override;
  void gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
             std::span<double> x) const override;
  double log_potential(std::size_t t, std::span<const double> prev,
                       std::span<const double> x) const override;

  std::size_t lambda_dimension() const override { return 1; }
  void lambda(std::span<const double> x, std::span<double> out) const override;

  /// Brownian increments implied by the Euler path x started at x_prev_last.
  void recover_increments(double x_prev_last, std::span<const double> x,
                          std::span<double> out) const;

  const DiffusionSVParams& params() const { return p_; }
  const PathSpec& path() const { return path_; }

 private:
  DiffusionSVParams p_;
  std::vector<double> y_;
  PathSpec path_;
  BrownianBridge bridge_;
};

}  // namespace sqmc
