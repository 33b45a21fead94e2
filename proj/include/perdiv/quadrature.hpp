#pragma once

#include <array>

namespace perdiv {

struct GaussLegendre64 {
  std::array<double, 64> nodes;    // on [-1, 1]
  std::array<double, 64> weights;
};

const GaussLegendre64& gauss_legendre_64();

template <typename F>
double integrate_gl64(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto& gl = gauss_legendre_64();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double acc = 0.0;
  for (std::size_t i = 0; i < 64; ++i) acc += gl.weights[i] * f(mid + half * gl.nodes[i]);
  return acc * half;
}

}  // namespace perdiv
