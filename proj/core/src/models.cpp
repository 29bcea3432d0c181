#include "sqmc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sqmc/errors.hpp"
#include "sqmc/normal.hpp"
#include "sqmc/rng.hpp"
#include "scratch.hpp"

namespace sqmc {
namespace {

constexpr double kHalfLog2 = 0.34657359027997264;  // log(2) / 2

double gaussian_draw(CounterRng& rng) { return norm_quantile(rng.next_uniform()); }

}  // namespace

std::string_view to_string(Formalism f) { return f == Formalism::bootstrap ? "bootstrap" : "guided"; }

Formalism parse_formalism(std::string_view s) {
  if (s == "bootstrap") return Formalism::bootstrap;
  if (s == "guided") return Formalism::guided;
  throw std::invalid_argument("unknown formalism '" + std::string(s) + "'");
}

double truncated_normal_positive(double mean, double u) {
  // X - mean > -mean; reflect so the quantile is taken in the lower tail,
  // in log space so that a tiny admissible mass Phi(mean) stays accurate.
  u = std::clamp(u, 0.0, 1.0 - kQuantileEps);
  return std::max(0.0, mean - norm_quantile_log(std::log1p(-u) + norm_logcdf(mean)));
}

// ---------------------------------------------------------------------------

Ar1RareEventModel::Ar1RareEventModel(double phi) : phi_(phi) {
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("rare event: |phi| must be < 1");
}

void Ar1RareEventModel::gamma0(std::span<const double> u, std::span<double> x) const {
  x[0] = norm_quantile(u[0]);
}

void Ar1RareEventModel::gamma(std::size_t, std::span<const double> prev, std::span<const double> v,
                              std::span<double> x) const {
  x[0] = phi_ * prev[0] + norm_quantile(v[0]);
}

double Ar1RareEventModel::log_potential(std::size_t, std::span<const double>,
                                        std::span<const double> x) const {
  return x[0] >= 0.0 ? 0.0 : kLogZero;
}

Ar1RareEventGuided::Ar1RareEventGuided(double phi) : phi_(phi) {
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("rare event: |phi| must be < 1");
}

void Ar1RareEventGuided::gamma0(std::span<const double> u, std::span<double> x) const {
  x[0] = truncated_normal_positive(0.0, u[0]);
}

void Ar1RareEventGuided::gamma(std::size_t, std::span<const double> prev,
                               std::span<const double> v, std::span<double> x) const {
  x[0] = truncated_normal_positive(phi_ * prev[0], v[0]);
}

double Ar1RareEventGuided::log_potential(std::size_t, std::span<const double> prev,
                                         std::span<const double>) const {
  return norm_logcdf(prev.empty() ? 0.0 : phi_ * prev[0]);
}

double Ar1RareEventGuided::proposal_logpdf(std::span<const double> prev, double x) const {
  if (x < 0.0) return kLogZero;
  const double mean = prev.empty() ? 0.0 : phi_ * prev[0];
  return norm_logpdf(x, mean, 1.0) - norm_logcdf(mean);
}

// ---------------------------------------------------------------------------

void StochVolParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("stoch vol: sigma must be positive");
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("stoch vol: |phi| must be < 1");
}

StochVolData simulate_stoch_vol(const StochVolParams& p, std::size_t horizon, std::uint64_t seed) {
  p.validate();
  CounterRng rng = CounterRng::keyed(seed, Stream::simulate, 0);
  StochVolData data;
  double x = p.mu + p.sigma / std::sqrt(1.0 - p.phi * p.phi) * gaussian_draw(rng);
  for (std::size_t t = 0; t <= horizon; ++t) {
    if (t > 0) x = p.mu + p.phi * (x - p.mu) + p.sigma * gaussian_draw(rng);
    data.states.push_back(x);
    data.observations.push_back(std::exp(0.5 * x) * gaussian_draw(rng));
  }
  return data;
}

StochVolModel::StochVolModel(StochVolParams params, std::vector<double> observations,
                             Formalism formalism)
    : p_(params), y_(std::move(observations)), formalism_(formalism) {
  p_.validate();
  if (y_.empty()) throw std::invalid_argument("stoch vol: no observations");
}

void StochVolModel::gamma0(std::span<const double> u, std::span<double> x) const {
  x[0] = p_.mu + p_.sigma / std::sqrt(1.0 - p_.phi * p_.phi) * norm_quantile(u[0]);
}

double StochVolModel::guided_mean(std::size_t t, double prev) const {
  const double m = p_.mu + p_.phi * (prev - p_.mu);
  return m + 0.5 * p_.sigma * p_.sigma * (y_[t] * y_[t] * std::exp(-m) - 1.0);
}

void StochVolModel::gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
                          std::span<double> x) const {
  const double mean = formalism_ == Formalism::bootstrap ? p_.mu + p_.phi * (prev[0] - p_.mu)
                                                         : guided_mean(t, prev[0]);
  x[0] = mean + p_.sigma * norm_quantile(v[0]);
}

double StochVolModel::proposal_logpdf(std::size_t t, double prev, double x) const {
  const double mean = formalism_ == Formalism::bootstrap ? p_.mu + p_.phi * (prev - p_.mu)
                                                         : guided_mean(t, prev);
  return norm_logpdf(x, mean, p_.sigma * p_.sigma);
}

double StochVolModel::log_potential(std::size_t t, std::span<const double> prev,
                                    std::span<const double> x) const {
  const double log_f = norm_logpdf(y_[t], 0.0, std::exp(x[0]));
  if (t == 0 || formalism_ == Formalism::bootstrap) return log_f;
  const double var = p_.sigma * p_.sigma;
  const double log_p = norm_logpdf(x[0], p_.mu + p_.phi * (prev[0] - p_.mu), var);
  return log_p + log_f - norm_logpdf(x[0], guided_mean(t, prev[0]), var);
}

// ---------------------------------------------------------------------------

std::vector<double> lingauss_transition(std::size_t dimension, double alpha) {
  std::vector<double> f(dimension * dimension);
  for (std::size_t i = 0; i < dimension; ++i)
    for (std::size_t j = 0; j < dimension; ++j)
      f[i * dimension + j] = std::pow(alpha, static_cast<double>(i > j ? i - j : j - i));
  return f;
}

LinGaussData simulate_lingauss(std::size_t dimension, double alpha, std::size_t horizon,
                               std::uint64_t seed) {
  if (dimension == 0) throw std::invalid_argument("lingauss: dimension must be positive");
  const auto f = lingauss_transition(dimension, alpha);
  CounterRng rng = CounterRng::keyed(seed, Stream::simulate, 0);
  LinGaussData data{RowMatrix(horizon + 1, dimension), RowMatrix(horizon + 1, dimension)};
  for (std::size_t t = 0; t <= horizon; ++t) {
    for (std::size_t i = 0; i < dimension; ++i) {
      double mean = 0.0;
      if (t > 0)
        for (std::size_t j = 0; j < dimension; ++j)
          mean += f[i * dimension + j] * data.states(t - 1, j);
      data.states(t, i) = mean + gaussian_draw(rng);
    }
    for (std::size_t i = 0; i < dimension; ++i)
      data.observations(t, i) = data.states(t, i) + gaussian_draw(rng);
  }
  return data;
}

LinGaussModel::LinGaussModel(std::size_t dimension, double alpha, RowMatrix observations,
                             Formalism formalism)
    : d_(dimension),
      alpha_(alpha),
      f_(lingauss_transition(dimension, alpha)),
      y_(std::move(observations)),
      formalism_(formalism) {
  if (d_ == 0) throw std::invalid_argument("lingauss: dimension must be positive");
  if (y_.rows() == 0 || y_.cols() != d_)
    throw std::invalid_argument("lingauss: observations must be (T+1) x d");
}

void LinGaussModel::apply_f(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += f_[i * d_ + j] * x[j];
    out[i] = s;
  }
}

void LinGaussModel::gamma0(std::span<const double> u, std::span<double> x) const {
  const auto y = y_.row(0);
  for (std::size_t i = 0; i < d_; ++i) {
    const double z = norm_quantile(u[i]);
    x[i] = formalism_ == Formalism::bootstrap ? z : 0.5 * y[i] + z * std::numbers::sqrt2 / 2.0;
  }
}

void LinGaussModel::gamma(std::size_t t, std::span<const double> prev, std::span<const double> v,
                          std::span<double> x) const {
  apply_f(prev, x);
  const auto y = y_.row(t);
  for (std::size_t i = 0; i < d_; ++i) {
    const double z = norm_quantile(v[i]);
    x[i] = formalism_ == Formalism::bootstrap ? x[i] + z
                                              : 0.5 * (y[i] + x[i]) + z * std::numbers::sqrt2 / 2.0;
  }
}

double LinGaussModel::log_potential(std::size_t t, std::span<const double> prev,
                                    std::span<const double> x) const {
  const auto y = y_.row(t);
  double total = 0.0;
  if (formalism_ == Formalism::bootstrap) {
    for (std::size_t i = 0; i < d_; ++i) total += norm_logpdf(y[i], x[i], 1.0);
    return total;
  }
  detail::Scratch<32> scratch(d_);
  const auto mean = scratch.span();
  if (t == 0) {
    std::fill(mean.begin(), mean.end(), 0.0);
  } else {
    apply_f(prev, mean);
  }
  for (std::size_t i = 0; i < d_; ++i) total += norm_logpdf(y[i], mean[i], 2.0);
  return total;
}

// ---------------------------------------------------------------------------

double DiffusionSVParams::drift(double x) const {
  // kappa (mu_x - e^x) e^{-x} - omega^2 e^{-x} / 2
  const double e = std::exp(-x);
  return kappa * mu_x * e - kappa - 0.5 * omega * omega * e;
}

double DiffusionSVParams::volatility(double x) const { return omega * std::exp(-0.5 * x); }

double DiffusionSVParams::initial_variance() const {
  return omega == 0.0 ? 0.0 : omega * omega / (2.0 * kappa);
}

void DiffusionSVParams::validate() const {
  if (!(kappa > 0.0)) throw std::invalid_argument("diffusion sv: kappa must be positive");
  if (!(omega > 0.0)) throw std::invalid_argument("diffusion sv: omega must be positive");
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("diffusion sv: |rho| must be < 1");
}

void euler_propagate(const DiffusionSVParams& p, double x_prev_last,
                     std::span<const double> increments, std::span<double> out) {
  if (increments.size() != out.size() || out.empty())
    throw std::invalid_argument("euler: expected M increments and M outputs");
  const double dt = 1.0 / static_cast<double>(out.size());
  double x = x_prev_last;
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double e = std::exp(-x);
    if (!std::isfinite(e)) {
      std::ostringstream msg;
      msg << "euler: exp(-x) overflow at step " << m + 1 << " with x=" << x
          << " (x_prev_last=" << x_prev_last << ")";
      throw NumericError(msg.str());
    }
    // Same expression as DiffusionSVParams::drift, reusing e = exp(-x).
    const double drift = p.kappa * p.mu_x * e - p.kappa - 0.5 * p.omega * p.omega * e;
    x = x + dt * drift + p.omega * std::sqrt(e) * increments[m];
    if (!std::isfinite(x)) {
      std::ostringstream msg;
      msg << "euler: non-finite state at step " << m + 1 << " (x_prev_last=" << x_prev_last << ")";
      throw NumericError(msg.str());
    }
    out[m] = x;
  }
}

double diffusion_log_potential(const DiffusionSVParams& p, std::span<const double> x, double y_prev,
                               double y, std::span<const double> increments) {
  if (!(std::abs(p.rho) < 1.0))
    throw std::invalid_argument("diffusion sv: |rho| must be < 1 (degenerate variance)");
  if (x.size() != increments.size() || x.empty())
    throw std::invalid_argument("diffusion sv: path and increments differ in length");
  double sigma2 = 0.0;
  double z = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double half = std::exp(0.5 * x[m]);
    sigma2 += half * half;
    z += half * increments[m];
  }
  sigma2 /= static_cast<double>(x.size());
  const double mean = y_prev + p.mu_y + p.beta * sigma2 + p.rho * z;
  return norm_logpdf(y, mean, (1.0 - p.rho * p.rho) * sigma2);
}

DiffusionSVData simulate_diffusion_sv(const DiffusionSVParams& p, std::size_t horizon,
                                      std::size_t fine_steps, std::uint64_t seed) {
  if (fine_steps == 0) throw std::invalid_argument("diffusion sv: fine grid must be >= 1");
  if (p.kappa < 0.0 || p.omega < 0.0 || !(std::abs(p.rho) < 1.0))
    throw std::invalid_argument("diffusion sv: invalid parameters for simulation");
  CounterRng rng = CounterRng::keyed(seed, Stream::simulate, 0);
  const double dt = 1.0 / static_cast<double>(fine_steps);
  const double sd = std::sqrt(dt);
  const double rho_c = std::sqrt(1.0 - p.rho * p.rho);

  DiffusionSVData data;
  double x = p.mu_x + std::sqrt(p.initial_variance()) * gaussian_draw(rng);
  double y = 0.0;
  data.states.push_back(x);
  data.observations.push_back(y);
  std::vector<double> dw(fine_steps), path(fine_steps);
  for (std::size_t t = 1; t <= horizon; ++t) {
    for (auto& w : dw) w = sd * gaussian_draw(rng);
    euler_propagate(p, x, dw, path);
    double dy = 0.0;
    for (std::size_t m = 0; m < fine_steps; ++m) {
      const double dwy = p.rho * dw[m] + rho_c * sd * gaussian_draw(rng);
      dy += dt * (p.mu_y + p.beta * std::exp(path[m])) + std::exp(0.5 * path[m]) * dwy;
    }
    x = path.back();
    y += dy;
    data.states.push_back(x);
    data.observations.push_back(y);
  }
  return data;
}

DiffusionSVModel::DiffusionSVModel(DiffusionSVParams params, std::vector<double> observations,
                                   PathSpec path)
    : p_(params), y_(std::move(observations)), path_(path), bridge_(path.steps) {
  p_.validate();
  path_.validate();
  if (y_.empty()) throw std::invalid_argument("diffusion sv: no observations");
}

void DiffusionSVModel::gamma0(std::span<const double> u, std::span<double> x) const {
  const double x0 = p_.mu_x + std::sqrt(p_.initial_variance()) * norm_quantile(u[0]);
  std::fill(x.begin(), x.end(), x0);
}

void DiffusionSVModel::gamma(std::size_t, std::span<const double> prev, std::span<const double> v,
                             std::span<double> x) const {
  detail::Scratch<64> scratch(path_.steps);
  const auto inc = scratch.span();
  path_increments(path_, &bridge_, v, inc);
  euler_propagate(p_, prev[path_.steps - 1], inc, x);
}

void DiffusionSVModel::recover_increments(double x_prev_last, std::span<const double> x,
                                          std::span<double> out) const {
  const double dt = path_.dt();
  double left = x_prev_last;
  for (std::size_t m = 0; m < x.size(); ++m) {
    out[m] = (x[m] - left - dt * p_.drift(left)) / p_.volatility(left);
    left = x[m];
  }
}

double DiffusionSVModel::log_potential(std::size_t t, std::span<const double> prev,
                                       std::span<const double> x) const {
  if (t == 0) return 0.0;
  detail::Scratch<64> scratch(path_.steps);
  const auto inc = scratch.span();
  recover_increments(prev[path_.steps - 1], x, inc);
  return diffusion_log_potential(p_, x, y_[t - 1], y_[t], inc);
}

void DiffusionSVModel::lambda(std::span<const double> x, std::span<double> out) const {
  out[0] = x[path_.steps - 1];
}

}  // namespace sqmc
