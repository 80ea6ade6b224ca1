#pragma once

#include "perturba/matrix.hpp"

namespace perturba {

/// One classical fourth-order Runge-Kutta step for y' = f(t, y).
template <class F> Matrix<double> rk4_step(F &&f, double t, const Matrix<double> &y, double dt) {
  const auto k1 = f(t, y);
  const auto k2 = f(t + dt / 2, y + (dt / 2) * k1);
  const auto k3 = f(t + dt / 2, y + (dt / 2) * k2);
  const auto k4 = f(t + dt, y + dt * k3);
  return y + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace perturba
