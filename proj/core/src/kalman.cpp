#include "sqmc/kalman.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sqmc {

Eigen::MatrixXd lingauss_transition_matrix(std::size_t dimension, double alpha) {
  const auto d = static_cast<Eigen::Index>(dimension);
  Eigen::MatrixXd f(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) f(i, j) = std::pow(alpha, static_cast<double>(std::abs(i - j)));
  return f;
}

std::vector<KalmanState> kalman_filter(const Eigen::MatrixXd& transition,
                                       const RowMatrix& observations) {
  const auto d = transition.rows();
  if (transition.cols() != d || static_cast<Eigen::Index>(observations.cols()) != d)
    throw std::invalid_argument("kalman: dimension mismatch");
  for (const double y : observations.data())
    if (!std::isfinite(y)) throw std::invalid_argument("kalman: non-finite observation");

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  std::vector<KalmanState> out;
  out.reserve(observations.rows());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd cov = identity;
  double log_lik = 0.0;
  for (std::size_t t = 0; t < observations.rows(); ++t) {
    if (t > 0) {
      mean = transition * mean;
      cov = transition * cov * transition.transpose() + identity;
    }
    const auto row = observations.row(t);
    const Eigen::Map<const Eigen::VectorXd> y(row.data(), d);

    const Eigen::MatrixXd s = cov + identity;
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    const Eigen::VectorXd innovation = y - mean;
    const Eigen::VectorXd solved = llt.solve(innovation);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_lik += -0.5 * (static_cast<double>(d) * log_2pi + log_det + innovation.dot(solved));

    const Eigen::MatrixXd gain = llt.solve(cov).transpose();  // cov S^{-1}, both symmetric
    mean += gain * innovation;
    const Eigen::MatrixXd a = identity - gain;
    cov = a * cov * a.transpose() + gain * gain.transpose();
    cov = 0.5 * (cov + cov.transpose());
    out.push_back({mean, cov, log_lik});
  }
  return out;
}

}  // namespace sqmc
