#ifndef MARKOVRNG_TESTS_FIXTURES_H_
#define MARKOVRNG_TESTS_FIXTURES_H_

#include <cmath>
#include <vector>

#include "markovrng/markov_core.h"
#include "markovrng/matrix.h"

namespace fixtures {

using markovrng::Matrix;
using markovrng::TransitionModel;

// Binary chain W = [[1-p, q], [p, 1-q]] (to, from), started in state 0.
inline TransitionModel binary(double p = 0.1, double q = 0.2, std::vector<double> initial = {1.0, 0.0}) {
  return markovrng::make_model({{1.0 - p, q}, {p, 1.0 - q}}, initial);
}

// Every column equal to p; started from p.
inline TransitionModel iid(const std::vector<double>& p) {
  std::vector<std::vector<double>> rows(p.size(), std::vector<double>(p.size()));
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < p.size(); ++j) rows[i][j] = p[i];
  return markovrng::make_model(rows, p);
}

inline TransitionModel cycle(int k) {
  std::vector<std::vector<double>> rows(k, std::vector<double>(k, 0.0));
  for (int j = 0; j < k; ++j) rows[(j + 1) % k][j] = 1.0;
  std::vector<double> init(k, 0.0);
  init[0] = 1.0;
  return markovrng::make_model(rows, init);
}

// Joint kernel W(x,y|x',y') = wy(y|y') v(x|y), stored (to, from); v[x][y].
inline TransitionModel hidden_free(const std::vector<std::vector<double>>& wy, const std::vector<std::vector<double>>& v,
                                   const std::vector<double>& initial) {
  const int nx = static_cast<int>(v.size()), ny = static_cast<int>(wy.size());
  Matrix k(nx * ny, nx * ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int xp = 0; xp < nx; ++xp)
        for (int yp = 0; yp < ny; ++yp) k(x * ny + y, xp * ny + yp) = wy[y][yp] * v[x][y];
  return markovrng::make_model(nx, ny, k, initial);
}

// The 2x2 joint model used throughout: strongly non-hidden.
inline TransitionModel joint_a2() {
  return hidden_free({{0.7, 0.4}, {0.3, 0.6}}, {{0.8, 0.3}, {0.2, 0.7}}, {0.4, 0.1, 0.2, 0.3});
}

// W_X(x|x') W_Y(y|y'): non-hidden, and strongly non-hidden only when the
// columns of W_X are permutations of each other.
inline TransitionModel product(const std::vector<std::vector<double>>& wx, const std::vector<std::vector<double>>& wy,
                               const std::vector<double>& initial) {
  const int nx = static_cast<int>(wx.size()), ny = static_cast<int>(wy.size());
  Matrix k(nx * ny, nx * ny);
  for (int x = 0; x < nx; ++x)
    for (int y = 0; y < ny; ++y)
      for (int xp = 0; xp < nx; ++xp)
        for (int yp = 0; yp < ny; ++yp) k(x * ny + y, xp * ny + yp) = wx[x][xp] * wy[y][yp];
  return markovrng::make_model(nx, ny, k, initial);
}

inline double binary_entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }

// Closed-form Perron eigenvalue of the tilted binary kernel.
inline double binary_lambda(double p, double q, double theta) {
  const double a = std::pow(1.0 - p, 1.0 + theta), d = std::pow(1.0 - q, 1.0 + theta);
  const double b = std::pow(q, 1.0 + theta), c = std::pow(p, 1.0 + theta);
  return 0.5 * (a + d) + 0.5 * std::sqrt((a - d) * (a - d) + 4.0 * b * c);
}

}  // namespace fixtures

#endif  // MARKOVRNG_TESTS_FIXTURES_H_
