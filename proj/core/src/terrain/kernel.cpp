#include "terralio/terrain/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace terralio::terrain {

double KernelParams::sigma_tilde() const {
  return std::sqrt(sigma * sigma + sigma_eps * sigma_eps);
}

double KernelParams::moment_scale() const {
  const double st2 = sigma * sigma + sigma_eps * sigma_eps;
  return sigma * sigma / st2;
}

void KernelParams::finalize() {
  if (!(sigma > 0.0)) throw std::invalid_argument("kernel sigma must be > 0");
  if (sigma_eps < 0.0) throw std::invalid_argument("sigma_eps must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
  cutoff_radius = std::max(cutoff_radius, 3.0 * sigma_tilde());
  if (!std::isfinite(sigma) || !std::isfinite(sigma_eps) ||
      !std::isfinite(lambda))
    throw std::invalid_argument("non-finite kernel parameter");
}

double kernel_eval(const KernelParams& params, const Vec2& x, const Vec2& c,
                   double bandwidth) {
  if (!x.allFinite() || !c.allFinite() || !std::isfinite(bandwidth))
    throw std::domain_error("non-finite kernel input");
  if (!(bandwidth > 0.0)) throw std::domain_error("bandwidth must be > 0");
  const double r2 = (x - c).squaredNorm();
  if (r2 > params.cutoff_radius * params.cutoff_radius) return 0.0;
  return std::exp(-r2 / (2.0 * bandwidth * bandwidth));
}

}  // namespace terralio::terrain
