#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sqmc/matrix.hpp"

namespace sqmc {

/// Filtering law N(mean, cov) of X_t given Y_{0:t}, and log p(y_{0:t}).
struct KalmanState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double log_likelihood = 0.0;
};

/// Exact filter for X_0 ~ N(0, I), X_t = F X_{t-1} + V_t, Y_t = X_t + W_t with
/// unit process and observation noise. Joseph-form covariance update.
/// One row of `observations` per time step; throws std::invalid_argument on
/// non-finite data or shape mismatch.
std::vector<KalmanState> kalman_filter(const Eigen::MatrixXd& transition,
                                       const RowMatrix& observations);

/// Convenience: F = (alpha^{|i-j|}).
Eigen::MatrixXd lingauss_transition_matrix(std::size_t dimension, double alpha);

}  // namespace sqmc
