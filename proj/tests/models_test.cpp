#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sqmc/errors.hpp"
#include "sqmc/models.hpp"
#include "sqmc/normal.hpp"
#include "sqmc/rng.hpp"
#include "sqmc/smc.hpp"
#include "sqmc/sqmc.hpp"

namespace {

using sqmc::Formalism;

double mean_of(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
  const double m = mean_of(x);
  double ss = 0.0;
  for (const double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

// Trapezoidal integral of exp(f) over [a, b].
template <typename F>
double integrate_exp(F f, double a, double b, int n = 200000) {
  const double h = (b - a) / n;
  double total = 0.5 * (std::exp(f(a)) + std::exp(f(b)));
  for (int i = 1; i < n; ++i) total += std::exp(f(a + i * h));
  return total * h;
}

// Straight-line Euler recursion for the log-volatility.
std::vector<double> euler_reference(const sqmc::DiffusionSVParams& p, double x0, const std::vector<double>& dw) {
  std::vector<double> out;
  const double dt = 1.0 / dw.size();
  double x = x0;
  for (const double w : dw) {
    const double mu = p.kappa * (p.mu_x - std::exp(x)) * std::exp(-x) - 0.5 * p.omega * p.omega * std::exp(-x);
    const double sigma = p.omega * std::exp(-x / 2);
    x += mu * dt + sigma * w;
    out.push_back(x);
  }
  return out;
}

// Y_t - Y_{t-1} | path ~ N(mu_y + beta s2 + rho sum e^{x/2} dW, (1 - rho^2) s2), s2 = mean e^x.
double diffusion_potential_reference(const sqmc::DiffusionSVParams& p, const std::vector<double>& x, double y0,
                                     double y1, const std::vector<double>& dw) {
  double s2 = 0.0, z = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    s2 += std::exp(x[m]) / x.size();
    z += std::exp(x[m] / 2) * dw[m];
  }
  const double var = (1 - p.rho * p.rho) * s2;
  const double r = y1 - y0 - p.mu_y - p.beta * s2 - p.rho * z;
  return -0.5 * std::log(2 * M_PI * var) - r * r / (2 * var);
}

// ---------------------------------------------------------------------------
// Rare event

TEST(TruncatedNormal, InverseCdfOnPositiveHalfLine) {
  for (double mean : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    double prev = -1.0;
    for (int i = 1; i < 200; ++i) {
      const double u = i / 200.0;
      const double x = sqmc::truncated_normal_positive(mean, u);
      EXPECT_GE(x, 0.0);
      EXPECT_GT(x, prev);
      prev = x;
      const double cdf = (sqmc::norm_cdf(x - mean) - sqmc::norm_cdf(-mean)) / sqmc::norm_cdf(mean);
      EXPECT_NEAR(cdf, u, 1e-7) << "mean " << mean;
    }
  }
  // Far from the admissible region the law is close to Exp(|mean|).
  for (double mean : {-30.0, -60.0}) {
    const double x = sqmc::truncated_normal_positive(mean, 0.5);
    EXPECT_NEAR(x, std::log(2.0) / -mean, 0.01 * std::log(2.0) / -mean);
  }
  EXPECT_TRUE(std::isfinite(sqmc::truncated_normal_positive(0.0, 1.0)));
}

TEST(RareEvent, GuidedProposalIntegratesToOne) {
  sqmc::Ar1RareEventGuided model(0.7);
  for (double prev : {-2.0, 0.0, 1.5}) {
    const std::vector<double> p{prev};
    const double mass = integrate_exp([&](double x) { return model.proposal_logpdf(p, x); }, 0.0, 15.0);
    EXPECT_NEAR(mass, 1.0, 1e-6);
  }
  EXPECT_NEAR(integrate_exp([&](double x) { return model.proposal_logpdf({}, x); }, 0.0, 15.0), 1.0, 1e-6);
}

TEST(RareEvent, GuidedLikelihoodIsExactAtPhiZero) {
  sqmc::Ar1RareEventGuided model(0.0);
  sqmc::SmcConfig sc;
  sc.particles = 1000;
  sc.horizon = 4;
  sqmc::SqmcConfig qc;
  qc.particles = 1000;
  qc.horizon = 4;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    sc.seed = qc.seed = seed;
    const auto a = sqmc::run_smc(model, sc);
    const auto b = sqmc::run_sqmc(model, qc);
    for (std::size_t t = 0; t <= 4; ++t) {
      EXPECT_NEAR(std::exp(a.log_likelihood[t]), std::ldexp(1.0, -static_cast<int>(t + 1)), 1e-15);
      EXPECT_NEAR(std::exp(b.log_likelihood[t]), std::ldexp(1.0, -static_cast<int>(t + 1)), 1e-15);
    }
  }
}

TEST(RareEvent, BootstrapPotentialIsIndicator) {
  sqmc::Ar1RareEventModel model(0.5);
  const std::vector<double> pos{0.1}, neg{-0.1}, zero{0.0};
  EXPECT_EQ(model.log_potential(1, pos, pos), 0.0);
  EXPECT_EQ(model.log_potential(1, pos, zero), 0.0);
  EXPECT_EQ(model.log_potential(1, pos, neg), sqmc::kLogZero);
  EXPECT_THROW(sqmc::Ar1RareEventModel(1.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Stochastic volatility

TEST(StochVol, GuidedProposalIntegratesToOne) {
  const auto data = sqmc::simulate_stoch_vol({}, 10, 4);
  sqmc::StochVolModel model({}, data.observations, Formalism::guided);
  for (std::size_t t = 1; t <= 10; t += 3)
    for (double prev : {-2.0, -1.0, 0.5}) {
      const double mass = integrate_exp([&](double x) { return model.proposal_logpdf(t, prev, x); }, -15.0, 15.0);
      EXPECT_NEAR(mass, 1.0, 1e-6);
    }
}

TEST(StochVol, GuidedMeanIsLinearizedOptimum) {
  // The proposal mean maximizes log p(x | prev) + the tangent-line
  // approximation of log f(y | x) at the prior mean.
  const sqmc::StochVolParams p;
  const std::vector<double> y{0.0, 1.3};
  sqmc::StochVolModel model(p, y, Formalism::guided);
  const double prev = -0.4;
  const double m = p.mu + p.phi * (prev - p.mu);
  const auto objective = [&](double x) {
    const double lin = -0.5 * x - 0.5 * y[1] * y[1] * std::exp(-m) * (1.0 - (x - m));
    return -0.5 * (x - m) * (x - m) / (p.sigma * p.sigma) + lin;
  };
  double best = m, best_val = objective(m);
  for (double x = m - 3; x < m + 3; x += 1e-5)
    if (objective(x) > best_val) best_val = objective(x), best = x;
  EXPECT_NEAR(model.guided_mean(1, prev), best, 1e-4);
}

TEST(StochVol, GuidedPotentialIsPriorTimesLikelihoodOverProposal) {
  const sqmc::StochVolParams p;
  const std::vector<double> y{0.3, -0.8};
  sqmc::StochVolModel model(p, y, Formalism::guided);
  const std::vector<double> prev{-1.3}, x{-0.6};
  const double log_prior = sqmc::norm_logpdf(x[0], p.mu + p.phi * (prev[0] - p.mu), p.sigma * p.sigma);
  const double log_lik = sqmc::norm_logpdf(y[1], 0.0, std::exp(x[0]));
  EXPECT_NEAR(model.log_potential(1, prev, x), log_prior + log_lik - model.proposal_logpdf(1, prev[0], x[0]), 1e-12);
}

// ---------------------------------------------------------------------------
// Linear Gaussian

TEST(LinGauss, TransitionMatrix) {
  const auto f = sqmc::lingauss_transition(3, 0.4);
  EXPECT_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[1], 0.4);
  EXPECT_DOUBLE_EQ(f[2], 0.16);
  EXPECT_DOUBLE_EQ(f[3], 0.4);
  EXPECT_DOUBLE_EQ(f[8], 1.0);
}

TEST(LinGauss, BootstrapTransitionIsFxPlusNoise) {
  // alpha^{|i-j|} has a unit diagonal, so for d = 1 the state is a random
  // walk whatever alpha is.
  sqmc::RowMatrix y(3, 1, 0.2);
  sqmc::LinGaussModel model(1, 0.0, y, Formalism::bootstrap);
  const std::vector<double> v{0.9};
  std::vector<double> a(1);
  const std::vector<double> prev{5.0};
  model.gamma(1, prev, v, a);
  EXPECT_EQ(a[0], 5.0 + sqmc::norm_quantile(0.9));

  const auto data = sqmc::simulate_lingauss(3, 0.4, 2, 1);
  sqmc::LinGaussModel m3(3, 0.4, data.observations, Formalism::bootstrap);
  const std::vector<double> p3{1.0, -2.0, 0.5}, v3{0.5, 0.5, 0.5};
  std::vector<double> x(3);
  m3.gamma(1, p3, v3, x);
  EXPECT_NEAR(x[0], 1.0 - 0.8 + 0.08, 1e-15);
  EXPECT_NEAR(x[1], 0.4 - 2.0 + 0.2, 1e-15);
  EXPECT_NEAR(x[2], 0.16 - 0.8 + 0.5, 1e-15);
}

TEST(LinGauss, GuidedPotentialIgnoresCurrentState) {
  const auto data = sqmc::simulate_lingauss(3, 0.4, 4, 2);
  sqmc::LinGaussModel model(3, 0.4, data.observations, Formalism::guided);
  const std::vector<double> prev{0.3, -1.0, 2.0}, x1{0, 0, 0}, x2{5, -5, 1};
  EXPECT_EQ(model.log_potential(2, prev, x1), model.log_potential(2, prev, x2));
  EXPECT_EQ(model.log_potential(0, {}, x1), model.log_potential(0, {}, x2));
}

TEST(LinGauss, Simulation) {
  const auto a = sqmc::simulate_lingauss(1, 0.4, 30, 5);
  const auto b = sqmc::simulate_lingauss(1, 0.4, 30, 5);
  EXPECT_EQ(a.observations, b.observations);
  EXPECT_EQ(a.observations.rows(), 31u);
  EXPECT_NE(sqmc::simulate_lingauss(1, 0.4, 30, 6).observations, a.observations);
}

// ---------------------------------------------------------------------------
// Bootstrap and guided formalisms target the same law

struct TargetCase {
  const char* name;
  std::function<std::unique_ptr<sqmc::FeynmanKacModel>(Formalism)> make;
  std::size_t horizon;
};

std::vector<TargetCase> target_cases() {
  static const auto sv = sqmc::simulate_stoch_vol({}, 15, 12);
  static const auto lg = sqmc::simulate_lingauss(2, 0.4, 15, 12);
  return {
      {"stoch_vol", [](Formalism f) { return std::make_unique<sqmc::StochVolModel>(sqmc::StochVolParams{}, sv.observations, f); }, 15},
      {"lingauss", [](Formalism f) { return std::make_unique<sqmc::LinGaussModel>(2, 0.4, lg.observations, f); }, 15},
      {"rare_event",
       [](Formalism f) -> std::unique_ptr<sqmc::FeynmanKacModel> {
         if (f == Formalism::guided) return std::make_unique<sqmc::Ar1RareEventGuided>(0.5);
         return std::make_unique<sqmc::Ar1RareEventModel>(0.5);
       },
       6},
  };
}

TEST(Formalisms, SameFilteringLaw) {
  const std::size_t reps = 6;
  for (const auto& c : target_cases()) {
    const auto boot = c.make(Formalism::bootstrap), guided = c.make(Formalism::guided);
    std::vector<std::vector<double>> a, b;
    for (std::size_t r = 0; r < reps; ++r) {
      sqmc::SmcConfig cfg;
      cfg.particles = 1 << 14;
      cfg.horizon = c.horizon;
      cfg.seed = 1000 + r;
      a.push_back(sqmc::run_smc(*boot, cfg).estimates[0]);
      b.push_back(sqmc::run_smc(*guided, cfg).estimates[0]);
    }
    int inside = 0;
    for (std::size_t t = 0; t <= c.horizon; ++t) {
      std::vector<double> at, bt;
      for (std::size_t r = 0; r < reps; ++r) at.push_back(a[r][t]), bt.push_back(b[r][t]);
      const double se = std::sqrt(var_of(at) / reps + var_of(bt) / reps);
      inside += std::abs(mean_of(at) - mean_of(bt)) <= 3.0 * se + 1e-12;
    }
    // Allow one excursion in ~16 checks at the 3-sigma level.
    EXPECT_GE(inside, static_cast<int>(c.horizon)) << c.name;
  }
}

TEST(Formalisms, GuidedWeightsVaryLess) {
  const std::size_t n = 4000;
  for (const auto& c : target_cases()) {
    if (std::string(c.name) == "rare_event") continue;
    const auto boot = c.make(Formalism::bootstrap), guided = c.make(Formalism::guided);
    const std::size_t d = boot->dimension();
    std::vector<double> ratio;
    sqmc::RowMatrix cloud(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> u(d);
      const auto rng = sqmc::CounterRng::keyed(1, sqmc::Stream::initial, 0, i);
      for (std::size_t k = 0; k < d; ++k) u[k] = rng.uniform(k);
      boot->gamma0(u, cloud.row(i));
    }
    for (std::size_t t = 1; t <= c.horizon; ++t) {
      std::vector<double> lb, lgd, x(d), v(d);
      for (std::size_t i = 0; i < n; ++i) {
        const auto rng = sqmc::CounterRng::keyed(2, sqmc::Stream::propagate, t, i);
        for (std::size_t k = 0; k < d; ++k) v[k] = rng.uniform(k);
        boot->gamma(t, cloud.row(i), v, x);
        lb.push_back(boot->log_potential(t, cloud.row(i), x));
        guided->gamma(t, cloud.row(i), v, x);
        lgd.push_back(guided->log_potential(t, cloud.row(i), x));
      }
      ratio.push_back(var_of(lgd) / var_of(lb));
    }
    std::sort(ratio.begin(), ratio.end());
    EXPECT_LT(ratio[ratio.size() / 2], 1.0) << c.name;
  }
}

// ---------------------------------------------------------------------------
// Diffusion SV

TEST(Diffusion, ConstantPathWithoutDriftOrNoise) {
  sqmc::DiffusionSVParams p;
  p.kappa = 0.0;
  p.omega = 0.0;
  const std::vector<double> dw{0.0, 0.0, 0.0, 0.0};
  std::vector<double> out(4);
  sqmc::euler_propagate(p, 0.7, dw, out);
  for (const double x : out) EXPECT_EQ(x, 0.7);
}

TEST(Diffusion, SingleEulerStep) {
  const sqmc::DiffusionSVParams p;
  const double x = 0.3, dw = 0.27;
  std::vector<double> out(1);
  sqmc::euler_propagate(p, x, std::vector<double>{dw}, out);
  EXPECT_NEAR(out[0], x + p.drift(x) + p.volatility(x) * dw, 1e-15);
}

TEST(Diffusion, EulerMatchesReference) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.5);
  sqmc::DiffusionSVParams p;
  p.kappa = 0.3;
  p.omega = 0.4;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> dw(4), out(4);
    for (auto& w : dw) w = g(rng);
    const double x0 = g(rng);
    sqmc::euler_propagate(p, x0, dw, out);
    const auto ref = euler_reference(p, x0, dw);
    for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(out[m], ref[m], 1e-13 * (1 + std::abs(ref[m])));
  }
}

TEST(Diffusion, EulerOverflowIsReported) {
  sqmc::DiffusionSVParams p;
  const std::vector<double> dw{0.0, 0.0};
  std::vector<double> out(2);
  EXPECT_THROW(sqmc::euler_propagate(p, -800.0, dw, out), sqmc::NumericError);
}

TEST(Diffusion, PotentialReducesToRandomWalkDensity) {
  sqmc::DiffusionSVParams p;
  p.rho = 0.0;
  p.beta = 0.0;
  p.mu_y = 0.0;
  const std::vector<double> x(5, 0.0), dw{0.1, -0.2, 0.3, 0.0, 0.5};
  EXPECT_NEAR(sqmc::diffusion_log_potential(p, x, 0.4, 1.1, dw), sqmc::norm_logpdf(1.1, 0.4, 1.0), 1e-14);
}

TEST(Diffusion, PotentialMatchesReference) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  sqmc::DiffusionSVParams p;
  p.beta = 0.3;
  p.mu_y = 0.05;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> x(6), dw(6);
    for (auto& v : x) v = 0.5 * g(rng);
    for (auto& v : dw) v = 0.4 * g(rng);
    const double y0 = g(rng), y1 = y0 + g(rng);
    EXPECT_NEAR(sqmc::diffusion_log_potential(p, x, y0, y1, dw),
                diffusion_potential_reference(p, x, y0, y1, dw), 1e-11);
  }
  p.rho = 1.0;
  std::vector<double> x(2, 0.0);
  EXPECT_THROW(sqmc::diffusion_log_potential(p, x, 0, 0, x), std::invalid_argument);
}

TEST(Diffusion, UncorrelatedPotentialIgnoresPreviousPath) {
  sqmc::DiffusionSVParams p;
  p.rho = 0.0;
  const std::vector<double> y{0.0, 0.8};
  sqmc::DiffusionSVModel model(p, y, {5, sqmc::PathConstruction::forward});
  const std::vector<double> x{0.7, 0.75, 0.8, 0.78, 0.9};
  const std::vector<double> a{0, 0, 0, 0, 0.6}, b{1, 2, 3, 4, 1.9};
  EXPECT_EQ(model.log_potential(1, a, x), model.log_potential(1, b, x));
}

TEST(Diffusion, LambdaContractIsExact) {
  const auto data = sqmc::simulate_diffusion_sv({}, 3, 50, 2);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.8, 0.3);
  std::uniform_real_distribution<double> unif;
  for (auto c : {sqmc::PathConstruction::forward, sqmc::PathConstruction::bridge}) {
    sqmc::DiffusionSVModel model({}, data.observations, {5, c});
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<double> prev(5), other(5), v(5), x1(5), x2(5);
      for (auto& z : prev) z = g(rng);
      other = prev;
      for (std::size_t m = 0; m + 1 < 5; ++m) other[m] = g(rng);
      for (auto& z : v) z = unif(rng);
      std::vector<double> la(1), lb(1);
      model.lambda(prev, la);
      model.lambda(other, lb);
      ASSERT_EQ(la, lb);
      model.gamma(2, prev, v, x1);
      model.gamma(2, other, v, x2);
      ASSERT_EQ(x1, x2);
      ASSERT_EQ(model.log_potential(2, prev, x1), model.log_potential(2, other, x1));
    }
  }
}

TEST(Diffusion, RecoversDrivingIncrements) {
  const auto data = sqmc::simulate_diffusion_sv({}, 2, 50, 3);
  sqmc::DiffusionSVModel model({}, data.observations, {5, sqmc::PathConstruction::forward});
  const std::vector<double> prev(5, 0.6), v{0.2, 0.9, 0.5, 0.33, 0.71};
  std::vector<double> x(5), inc(5), back(5);
  model.gamma(1, prev, v, x);
  sqmc::increments_forward(v, inc);
  model.recover_increments(prev[4], x, back);
  for (std::size_t m = 0; m < 5; ++m) EXPECT_NEAR(back[m], inc[m], 1e-9);
}

TEST(Diffusion, InitialLawAndGroundPotential) {
  const sqmc::DiffusionSVParams p;
  const std::vector<double> y{0.0, 0.1};
  sqmc::DiffusionSVModel model(p, y, {3, sqmc::PathConstruction::bridge});
  std::vector<double> x(3);
  model.gamma0(std::vector<double>{0.8413447460685429}, x);
  for (const double v : x) EXPECT_NEAR(v, p.mu_x + std::sqrt(p.omega * p.omega / (2 * p.kappa)), 1e-12);
  EXPECT_EQ(model.log_potential(0, {}, x), 0.0);
  EXPECT_EQ(model.lambda_dimension(), 1u);
}

TEST(Diffusion, ParameterValidation) {
  sqmc::DiffusionSVParams p;
  p.omega = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = {};
  p.rho = -1.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Diffusion, ConstantVolatilityData) {
  // kappa = omega = 0: X stays at mu_x and Y increments are
  // N(mu_y + beta e^{mu_x}, e^{mu_x}).
  sqmc::DiffusionSVParams p;
  p.kappa = 0.0;
  p.omega = 0.0;
  p.mu_y = 0.1;
  p.beta = 0.5;
  const std::size_t T = 4000;
  const auto data = sqmc::simulate_diffusion_sv(p, T, 20, 5);
  std::vector<double> dy;
  for (std::size_t t = 1; t <= T; ++t) {
    EXPECT_EQ(data.states[t], p.mu_x);
    dy.push_back(data.observations[t] - data.observations[t - 1]);
  }
  const double v = std::exp(p.mu_x);
  EXPECT_NEAR(mean_of(dy), p.mu_y + p.beta * v, 4 * std::sqrt(v / T));
  EXPECT_NEAR(var_of(dy), v, 4 * v * std::sqrt(2.0 / T));
}

}  // namespace
