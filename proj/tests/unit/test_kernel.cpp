#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "terralio/terrain/kernel.hpp"

using namespace terralio;
using namespace terralio::terrain;

TEST_CASE("kernel_eval matches the Gaussian formula inside the cutoff") {
  KernelParams p;
  p.cutoff_radius = 0.5;
  p.finalize();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(u(rng), u(rng)), c(u(rng), u(rng));
    const double d2 = (x - c).squaredNorm();
    const double b = 0.04;
    const double expected = (std::sqrt(d2) <= p.cutoff_radius)
                                ? std::exp(-d2 / (2.0 * b * b))
                                : 0.0;
    CHECK(kernel_eval(p, x, c, b) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("kernel is exactly zero beyond the cutoff") {
  KernelParams p;
  p.cutoff_radius = 0.5;  // above the automatic 3*sigma_tilde
  p.finalize();
  REQUIRE(p.cutoff_radius == 0.5);
  CHECK(kernel_eval(p, {0.0, 0.0}, {0.500001, 0.0}, 0.2) == 0.0);
  CHECK(kernel_eval(p, {0.0, 0.0}, {0.499999, 0.0}, 0.2) > 0.0);
}

TEST_CASE("widened bandwidth and moment scale closed forms") {
  KernelParams p;
  p.sigma = 0.04;
  p.sigma_eps = 0.1;
  CHECK(p.sigma_tilde() ==
        doctest::Approx(std::sqrt(0.04 * 0.04 + 0.1 * 0.1)).epsilon(1e-15));
  CHECK(p.moment_scale() ==
        doctest::Approx(0.04 * 0.04 / (0.04 * 0.04 + 0.1 * 0.1))
            .epsilon(1e-15));
}

TEST_CASE("finalize fills the automatic cutoff and rejects bad parameters") {
  KernelParams p;
  p.finalize();
  CHECK(p.cutoff_radius == doctest::Approx(3.0 * p.sigma_tilde()));

  KernelParams wider;
  wider.cutoff_radius = 2.0;
  wider.finalize();
  CHECK(wider.cutoff_radius == 2.0);

  KernelParams bad;
  bad.sigma = 0.0;
  CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);
  bad = KernelParams{};
  bad.lambda = -1.0;
  CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);
  bad = KernelParams{};
  bad.sigma_eps = -0.1;
  CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);
}

TEST_CASE("non-finite inputs are rejected") {
  KernelParams p;
  p.finalize();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(kernel_eval(p, {nan, 0.0}, {0.0, 0.0}, 0.1),
                  std::domain_error);
}
