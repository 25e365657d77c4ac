#include "nearfar/kalman.hpp"

#include <stdexcept>

#include "nearfar/errors.hpp"

namespace nearfar {

namespace {

using Mat7 = Eigen::Matrix<double, 7, 7>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat47 = Eigen::Matrix<double, 4, 7>;

Mat7 transition() {
    Mat7 f = Mat7::Identity();
    f(0, 4) = 1.0;  // x += vx
    f(1, 5) = 1.0;  // y += vy
    f(2, 6) = 1.0;  // s += vs
    return f;
}

Mat47 measurement_matrix() {
    Mat47 h = Mat47::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

void symmetrize(Mat7& p) { p = ((p + p.transpose()) * 0.5).eval(); }

}  // namespace

KalmanState init_state(const StateBox& z, const KalmanConfig& cfg) {
    if (!z.valid()) {
        throw std::invalid_argument("init_state: invalid measurement box");
    }
    KalmanState k;
    k.mean << z.x, z.y, z.s, z.r, 0.0, 0.0, 0.0;
    k.cov = Mat7::Zero();
    for (int i = 0; i < 7; ++i) k.cov(i, i) = cfg.p0_diag[static_cast<std::size_t>(i)];
    return k;
}

StateBox measurement_of(const KalmanState& k) {
    return StateBox{k.mean(0), k.mean(1), k.mean(2), k.mean(3)};
}

KalmanPrediction predict(const KalmanState& k, const KalmanConfig& cfg) {
    KalmanState out;
    // Apply F with plain additions so zero-velocity states propagate exactly.
    out.mean = k.mean;
    out.mean(0) += k.mean(4);
    out.mean(1) += k.mean(5);
    out.mean(2) += k.mean(6);
    if (out.mean(2) < cfg.s_min) out.mean(2) = cfg.s_min;

    const Mat7 f = transition();
    out.cov = f * k.cov * f.transpose();
    for (int i = 0; i < 7; ++i) out.cov(i, i) += cfg.q_diag[static_cast<std::size_t>(i)];
    symmetrize(out.cov);

    return KalmanPrediction{out, measurement_of(out)};
}

KalmanState update(const KalmanState& k, const StateBox& z, const KalmanConfig& cfg) {
    if (!z.valid()) {
        throw std::invalid_argument("update: invalid measurement box");
    }
    const Mat47 h = measurement_matrix();

    Vec4 zv;
    zv << z.x, z.y, z.s, z.r;
    const Vec4 innovation = zv - h * k.mean;

    Mat4 s = h * k.cov * h.transpose();
    for (int i = 0; i < 4; ++i) s(i, i) += cfg.r_diag[static_cast<std::size_t>(i)];

    const Eigen::LDLT<Mat4> ldlt(s);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        throw NumericError("update: singular innovation covariance");
    }
    // K = P Hᵀ S⁻¹, computed as the solution of S Kᵀ = H P.
    const Eigen::Matrix<double, 7, 4> gain = ldlt.solve(h * k.cov).transpose();

    KalmanState out;
    out.mean = k.mean + gain * innovation;

    // Joseph form keeps the covariance positive semi-definite.
    const Mat7 ikh = Mat7::Identity() - gain * h;
    Mat4 r = Mat4::Zero();
    for (int i = 0; i < 4; ++i) r(i, i) = cfg.r_diag[static_cast<std::size_t>(i)];
    out.cov = ikh * k.cov * ikh.transpose() + gain * r * gain.transpose();
    symmetrize(out.cov);

    return out;
}

}  // namespace nearfar
