#pragma once

#include <Eigen/Dense>
#include <array>

#include "nearfar/geom.hpp"

namespace nearfar {

// Noise/initialization parameters of the constant-velocity box filter.
// State is [x, y, s, r, vx, vy, vs]; the measurement is the leading
// [x, y, s, r] block.
struct KalmanConfig {
    std::array<double, 7> p0_diag{10.0, 10.0, 10.0, 10.0, 1e4, 1e4, 1e4};
    std::array<double, 7> q_diag{1.0, 1.0, 1.0, 1.0, 0.01, 0.01, 1e-4};
    std::array<double, 4> r_diag{1.0, 1.0, 10.0, 10.0};
    double s_min = 1.0;  // area floor applied on predict
};

struct KalmanState {
    Eigen::Matrix<double, 7, 1> mean;
    Eigen::Matrix<double, 7, 7> cov;
};

struct KalmanPrediction {
    KalmanState state;
    StateBox box;  // measurement projection of the predicted mean
};

// New state centered on z with zero velocity and the configured P0 diagonal.
KalmanState init_state(const StateBox& z, const KalmanConfig& cfg);

// Constant-velocity transition: x += vx, y += vy, s += vs, r and velocities
// unchanged. The area component is clamped to cfg.s_min so the projected box
// stays valid under velocity drift.
KalmanPrediction predict(const KalmanState& k, const KalmanConfig& cfg);

// Standard measurement update with H = [I4 | 0]. Covariance is kept
// symmetric; throws NumericError if the innovation covariance cannot be
// factored.
KalmanState update(const KalmanState& k, const StateBox& z, const KalmanConfig& cfg);

// Measurement projection of a state mean.
StateBox measurement_of(const KalmanState& k);

}  // namespace nearfar
