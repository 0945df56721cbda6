#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "terralio/so3.hpp"

using namespace terralio;

namespace {

// truncated matrix exponential series; independent of the Rodrigues formula
Mat3 exp_series(const Mat3& a, int terms = 40) {
  Mat3 sum = Mat3::Identity();
  Mat3 power = Mat3::Identity();
  double fact = 1.0;
  for (int k = 1; k < terms; ++k) {
    power = power * a;
    fact *= k;
    sum += power / fact;
  }
  return sum;
}

}  // namespace

TEST_CASE("hat reproduces the cross product") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int i = 0; i < 50; ++i) {
    const Vec3 v(n(rng), n(rng), n(rng)), w(n(rng), n(rng), n(rng));
    CHECK((hat(v) * w - v.cross(w)).norm() < 1e-15);
    CHECK((hat(v) + hat(v).transpose()).norm() == 0.0);
  }
}

TEST_CASE("so3_exp matches the matrix exponential series") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 w(u(rng), u(rng), u(rng));
    w *= 3.0;  // angles up to ~5 rad exercise the wrap-free branch
    if (w.norm() > 3.1) w *= 3.1 / w.norm();
    const Mat3 r = so3_exp(w);
    CHECK((r - exp_series(hat(w))).norm() < 1e-12);
    CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-12);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("log inverts exp below pi") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 w(u(rng), u(rng), u(rng));
    w *= (i % 2) ? 1.8 : 1e-3;
    CHECK((so3_log(so3_exp(w)) - w).norm() < 1e-10);
  }
}

TEST_CASE("small-angle branch is first order accurate") {
  const Vec3 w(1e-10, -2e-10, 3e-11);
  CHECK((so3_exp(w) - (Mat3::Identity() + hat(w))).norm() < 1e-19);
}

TEST_CASE("reorthonormalize restores a drifted rotation") {
  Mat3 r = so3_exp(Vec3(0.3, -0.2, 0.9));
  r += 1e-6 * Mat3::Ones();
  reorthonormalize(r);
  CHECK((r * r.transpose() - Mat3::Identity()).norm() < 1e-12);
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}
