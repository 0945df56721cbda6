#pragma once

#include "terralio/types.hpp"

namespace terralio {

/// Skew-symmetric matrix such that hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Rodrigues exponential map so(3) -> SO(3); Taylor branch below 1e-8 rad.
Mat3 so3_exp(const Vec3& omega);

/// Logarithm map SO(3) -> so(3); inverse of so3_exp for angles < pi.
Vec3 so3_log(const Mat3& R);

/// Re-orthonormalizes R in place when ||R^T R - I||_inf exceeds tol.
void reorthonormalize(Mat3& R, double tol = 1e-9);

}  // namespace terralio
