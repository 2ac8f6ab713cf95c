#include "rrgp/benchmarks.hpp"

#include "rrgp/random.hpp"

#include <cmath>

namespace rrgp {

namespace {

template <typename F>
Dataset generate(Eigen::Index T, std::uint64_t seed, const BenchmarkNoise& noise, F&& f) {
  if (T < 1) throw std::invalid_argument("benchmark length must be >= 1");
  if (noise.process_var < 0.0 || noise.obs_var < 0.0)
    throw std::invalid_argument("noise variances must be non-negative");
  Rng rng(seed);
  const double sw = std::sqrt(noise.process_var);
  const double se = std::sqrt(noise.obs_var);
  Dataset d;
  d.timestamps = Vector(T);
  d.inputs.resize(T, 0);
  d.observations.resize(T, 1);
  d.states.resize(T, 1);
  d.observation_names = {"y"};
  d.state_names = {"x"};
  double x = noise.x1 ? *noise.x1 : rng.normal();
  for (Eigen::Index t = 0; t < T; ++t) {
    (*d.timestamps)[t] = static_cast<double>(t + 1);
    d.states(t, 0) = x;
    d.observations(t, 0) = x + se * rng.normal();
    x = f(x) + sw * rng.normal();
  }
  return d;
}

}  // namespace

double tanh_transition(double x) { return std::tanh(2.0 * x); }

double kink_transition(double x) { return x < 4.0 ? x + 1.0 : -4.0 * x + 21.0; }

Dataset gen_benchmark1(Eigen::Index T, std::uint64_t seed, const BenchmarkNoise& noise) {
  return generate(T, seed, noise, tanh_transition);
}

Dataset gen_benchmark2(Eigen::Index T, std::uint64_t seed, const BenchmarkNoise& noise) {
  return generate(T, seed, noise, kink_transition);
}

}  // namespace rrgp
