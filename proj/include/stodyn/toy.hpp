#pragma once

// A [0,1]-valued process X_{t+1} = X_t + N_{t+1}/(t+2) whose noise has
// conditional mean -X_t and conditional variance at most X_t/(t+1). The
// noise is a symmetric two-point perturbation around the drift, with the
// amplitude clamped so the state stays in [0,1] and |N| <= 1.

#include <algorithm>
#include <cmath>

#include "stodyn/rng.hpp"

namespace stodyn {

struct ToyState {
  double x = 0.1;
  long t = 0;
};

struct ToyStep {
  ToyState state;
  double noise = 0.0;
};

inline double toy_noise_amplitude(double x, long t) {
  double td = static_cast<double>(t + 1);
  return std::min({std::sqrt(x / td), td * x, 1.0 - x});
}

inline ToyStep toy_step(const ToyState& s, Rng& rng) {
  double c = toy_noise_amplitude(s.x, s.t);
  double kick = c * rng.rademacher();
  ToyStep out;
  out.noise = kick - s.x;
  out.state.t = s.t + 1;
  // (x (t+1) + kick) / (t+2): the numerator cannot round below zero because
  // the amplitude clamp keeps kick >= -(t+1) x.
  out.state.x = (s.x * static_cast<double>(s.t + 1) + kick) /
                static_cast<double>(s.t + 2);
  out.state.x = std::min(1.0, std::max(0.0, out.state.x));
  return out;
}

// Uniform-in-time tail threshold 10 log(1/delta) / t.
inline double toy_bound(long t, double delta) {
  return 10.0 * std::log(1.0 / delta) / static_cast<double>(t);
}

}  // namespace stodyn
