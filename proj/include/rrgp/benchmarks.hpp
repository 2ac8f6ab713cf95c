#pragma once

// Ground-truth generators for the two synthetic 1-D systems
//   tanh:  x_{t+1} = tanh(2 x_t) + w_t,   y_t = x_t + e_t,  w, e ~ N(0, 0.1)
//   kink:  x_{t+1} = x_t + 1 + w_t        if x_t < 4
//          x_{t+1} = -4 x_t + 21 + w_t    if x_t >= 4,
//          y_t = x_t + e_t,  w, e ~ N(0, 1)

#include "rrgp/dataset.hpp"

#include <cstdint>
#include <optional>

namespace rrgp {

struct BenchmarkNoise {
  double process_var;
  double obs_var;
  /// Fixed initial state; drawn from N(0, 1) when empty.
  std::optional<double> x1;
};

inline constexpr BenchmarkNoise kTanhNoise{0.1, 0.1, std::nullopt};
inline constexpr BenchmarkNoise kKinkNoise{1.0, 1.0, std::nullopt};

double tanh_transition(double x);
double kink_transition(double x);

/// Dataset with columns t, y and x (the true states).
Dataset gen_benchmark1(Eigen::Index T, std::uint64_t seed, const BenchmarkNoise& noise = kTanhNoise);
Dataset gen_benchmark2(Eigen::Index T, std::uint64_t seed, const BenchmarkNoise& noise = kKinkNoise);

}  // namespace rrgp
