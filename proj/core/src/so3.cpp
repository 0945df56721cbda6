#include "terralio/so3.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace terralio {

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta2 = omega.squaredNorm();
  const Mat3 W = hat(omega);
  if (theta2 < 1e-16) {
    // second-order Taylor, valid for theta < 1e-8
    return Mat3::Identity() + W + 0.5 * W * W;
  }
  const double theta = std::sqrt(theta2);
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / theta2;
  return Mat3::Identity() + a * W + b * W * W;
}

Vec3 so3_log(const Mat3& R) {
  const double c = std::min(1.0, std::max(-1.0, (R.trace() - 1.0) * 0.5));
  const double theta = std::acos(c);
  Vec3 axis(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (theta < 1e-8) return 0.5 * axis;
  if (theta > M_PI - 1e-6) {
    // near pi the off-diagonal form degenerates; use the diagonal
    Vec3 d = ((R.diagonal().array() + 1.0) * 0.5).max(0.0).sqrt();
    int k;
    d.maxCoeff(&k);
    Vec3 v = d;
    if (R((k + 1) % 3, k) + R(k, (k + 1) % 3) < 0) v((k + 1) % 3) *= -1.0;
    if (R((k + 2) % 3, k) + R(k, (k + 2) % 3) < 0) v((k + 2) % 3) *= -1.0;
    return theta * v.normalized();
  }
  return (theta / (2.0 * std::sin(theta))) * axis;
}

void reorthonormalize(Mat3& R, double tol) {
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() <= tol) return;
  Eigen::JacobiSVD<Mat3> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 fixed = svd.matrixU() * svd.matrixV().transpose();
  if (fixed.determinant() < 0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    fixed = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  R = fixed;
}

}  // namespace terralio
