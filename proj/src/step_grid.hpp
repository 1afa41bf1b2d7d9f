#pragma once

#include <cmath>
#include <stdexcept>

namespace lcsync::detail {

// Fixed-step grid t0, t0 + h, ..., with a shortened final step landing on t1.
struct StepGrid {
  double t0;
  double t1;
  double h;
  long full_steps;
  double last_step;

  StepGrid(double t0_, double t1_, double h_) : t0(t0_), t1(t1_), h(h_) {
    if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step size h must be positive");
    if (!(t1 >= t0)) throw std::invalid_argument("integration requires t1 >= t0");
    const double ratio = (t1 - t0) / h;
    full_steps = static_cast<long>(std::floor(ratio + 1e-9));
    const double rem = (t1 - t0) - static_cast<double>(full_steps) * h;
    last_step = rem > 1e-9 * h ? rem : 0.0;
  }

  long steps() const { return full_steps + (last_step > 0.0 ? 1 : 0); }
  double time(long k) const {
    if (k >= steps()) return t1;
    return t0 + static_cast<double>(k) * h;
  }
  double step(long k) const { return k < full_steps ? h : last_step; }
};

}  // namespace lcsync::detail
