#include "markovrng/markov_core.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <sstream>

#include "json.hpp"

namespace markovrng {

namespace {

using nlohmann::json;

void validate_stochastic(const Matrix& kernel, const std::vector<double>& initial) {
  const int k = kernel.rows();
  for (int j = 0; j < k; ++j) {
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      const double v = kernel(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw NotStochastic("negative or non-finite entry in column " + std::to_string(j), j);
      }
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kStochasticTol) {
      std::ostringstream os;
      os.precision(17);
      os << "column " << j << " sums to " << sum;
      throw NotStochastic(os.str(), j);
    }
  }
  double sum = 0.0;
  for (double v : initial) {
    if (!std::isfinite(v) || v < 0.0) throw NotStochastic("negative initial probability", -1);
    sum += v;
  }
  if (std::fabs(sum - 1.0) > kStochasticTol) {
    throw NotStochastic("initial distribution does not sum to 1", -1);
  }
}

std::vector<int> bfs_levels(const Matrix& kernel, bool reverse) {
  const int k = kernel.rows();
  std::vector<int> level(k, -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < k; ++v) {
      const double w = reverse ? kernel(u, v) : kernel(v, u);
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

// Collatz-Wielandt bounds min/max (Mx)_i / x_i for a positive x.
std::pair<double, double> cw_bounds(const Matrix& m, bool transpose, const std::vector<double>& x) {
  const auto y = transpose ? m.apply_transposed(x) : m.apply(x);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] / x[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

bool normalize_step(std::vector<double>& y, std::vector<double>& x, double tol) {
  double sum = 0.0;
  for (double v : y) sum += v;
  if (!(sum > 0.0) || !std::isfinite(sum)) throw ConvergenceFailure("power iteration lost positivity");
  double diff = 0.0, top = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    y[i] /= sum;
    diff = std::max(diff, std::fabs(y[i] - x[i]));
    top = std::max(top, y[i]);
  }
  x.swap(y);
  return diff <= tol * top;
}

constexpr int kPowerPhase = 2000;

// One-sided shifted power iteration. Returns the sum-one eigenvector. Slowly
// converging cases (nearly periodic or badly scaled matrices) switch to
// inverse iteration with the Collatz-Wielandt upper bound as shift: the
// shift stays above the eigenvalue, so (shift I - M)^{-1} is nonnegative and
// iterates stay positive.
std::vector<double> power_side(const Matrix& m, bool transpose, double shift, int* iterations) {
  const int k = m.rows();
  std::vector<double> x(k, 1.0 / k), y(k);
  const double tol = std::max(kPerronTolerance, 8.0 * k * std::numeric_limits<double>::epsilon());
  for (int it = 1; it <= kPowerPhase; ++it) {
    y = transpose ? m.apply_transposed(x) : m.apply(x);
    for (int i = 0; i < k; ++i) y[i] += shift * x[i];
    if (normalize_step(y, x, tol)) {
      *iterations = std::max(*iterations, it);
      return x;
    }
  }
  for (double& v : x) v = std::max(v, std::numeric_limits<double>::min());
  Eigen::MatrixXd a(k, k);
  for (int it = kPowerPhase + 1; it <= kPerronMaxIterations; ++it) {
    auto [lo, hi] = cw_bounds(m, transpose, x);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      *iterations = std::max(*iterations, it);
      return x;
    }
    const double sigma = hi + std::max(hi - lo, 1e-300) * 1e-3;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) a(i, j) = (i == j ? sigma : 0.0) - (transpose ? m(j, i) : m(i, j));
    const Eigen::VectorXd sol = a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(x.data(), k));
    for (int i = 0; i < k; ++i) y[i] = std::max(sol[i], 0.0);
    if (normalize_step(y, x, tol)) {
      *iterations = std::max(*iterations, it);
      return x;
    }
    for (double& v : x) v = std::max(v, std::numeric_limits<double>::min());
  }
  throw ConvergenceFailure("power iteration did not converge within the iteration cap");
}

void normalize(std::vector<double>& v, Normalization normalization) {
  if (normalization == Normalization::kSumOne) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& e : v) e /= s;
  } else {
    const double lo = *std::min_element(v.begin(), v.end());
    if (!(lo > 0.0)) {
      throw ConvergenceFailure("eigenvector has a vanishing entry; min-entry normalization undefined");
    }
    for (double& e : v) e /= lo;
    // exact 1 at the minimum regardless of rounding in the division
    *std::min_element(v.begin(), v.end()) = 1.0;
  }
}

}  // namespace

TransitionModel make_model(int x_size, int y_size, const Matrix& kernel,
                           const std::vector<double>& initial, Convention convention) {
  if (x_size <= 0 || y_size <= 0) throw MalformedDocument("x_size and y_size must be positive");
  const int k = x_size * y_size;
  if (kernel.rows() != k || kernel.cols() != k) {
    throw MalformedDocument("kernel must be (x_size*y_size) square");
  }
  if (static_cast<int>(initial.size()) != k) {
    throw MalformedDocument("initial must have x_size*y_size entries");
  }
  TransitionModel m;
  m.x_size = x_size;
  m.y_size = y_size;
  m.kernel = convention == Convention::kToFrom ? kernel : kernel.transposed();
  m.initial = initial;
  validate_stochastic(m.kernel, m.initial);
  if (!is_irreducible(m.kernel)) throw NotIrreducible("kernel support graph is not strongly connected");
  m.period = period_of(m.kernel);
  return m;
}

TransitionModel make_model(const std::vector<std::vector<double>>& kernel,
                           const std::vector<double>& initial) {
  return make_model(static_cast<int>(kernel.size()), 1, Matrix::from_rows(kernel), initial);
}

TransitionModel parse_model(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document, nullptr, true, false);
  } catch (const json::exception& e) {
    throw MalformedDocument(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw MalformedDocument("model document must be an object");
    for (const char* key : {"x_size", "kernel", "initial"}) {
      if (!doc.contains(key)) throw MalformedDocument(std::string("missing field ") + key);
    }
    const int x_size = doc.at("x_size").get<int>();
    const int y_size = doc.value("y_size", 1);
    Convention convention = Convention::kToFrom;
    if (doc.contains("convention")) {
      const std::string c = doc.at("convention").get<std::string>();
      if (c == "to_from") {
        convention = Convention::kToFrom;
      } else if (c == "from_to") {
        convention = Convention::kFromTo;
      } else {
        throw MalformedDocument("convention must be \"to_from\" or \"from_to\"");
      }
    }
    const auto rows = doc.at("kernel").get<std::vector<std::vector<double>>>();
    const auto initial = doc.at("initial").get<std::vector<double>>();
    Matrix kernel;
    try {
      kernel = Matrix::from_rows(rows);
    } catch (const std::invalid_argument&) {
      throw MalformedDocument("kernel rows have unequal lengths");
    }
    return make_model(x_size, y_size, kernel, initial, convention);
  } catch (const json::exception& e) {
    throw MalformedDocument(std::string("schema violation: ") + e.what());
  }
}

TransitionModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedDocument("cannot open model file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_model(buffer.str());
}

std::string model_to_json(const TransitionModel& model) {
  json doc;
  doc["x_size"] = model.x_size;
  doc["y_size"] = model.y_size;
  doc["convention"] = "to_from";
  doc["kernel"] = model.kernel.to_rows();
  doc["initial"] = model.initial;
  return doc.dump();
}

bool is_irreducible(const Matrix& kernel) {
  if (kernel.rows() == 0) return false;
  for (int reverse = 0; reverse < 2; ++reverse) {
    const auto level = bfs_levels(kernel, reverse == 1);
    if (std::any_of(level.begin(), level.end(), [](int l) { return l < 0; })) return false;
  }
  return true;
}

int period_of(const Matrix& kernel) {
  const int k = kernel.rows();
  const auto level = bfs_levels(kernel, false);
  int g = 0;
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      if (kernel(v, u) > 0.0 && level[u] >= 0 && level[v] >= 0) {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

PerronResult perron_scaled(const Matrix& scaled, double log_scale, Normalization normalization) {
  const int k = scaled.rows();
  if (k == 0 || scaled.cols() != k) throw std::invalid_argument("perron: matrix must be square");
  double max_col = 0.0, max_row = 0.0;
  for (int i = 0; i < k; ++i) {
    double rs = 0.0, cs = 0.0;
    for (int j = 0; j < k; ++j) {
      rs += scaled(i, j);
      cs += scaled(j, i);
    }
    max_row = std::max(max_row, rs);
    max_col = std::max(max_col, cs);
  }
  if (!(max_row > 0.0)) throw ConvergenceFailure("perron: zero matrix");
  // A positive shift makes periodic matrices primitive without moving the
  // eigenvectors.
  const double shift = 0.25 * std::min(max_row, max_col);

  PerronResult res;
  res.normalization = normalization;
  res.right = power_side(scaled, false, shift, &res.iterations);
  res.left = power_side(scaled, true, shift, &res.iterations);

  const auto mr = scaled.apply(res.right);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < k; ++i) {
    num += mr[i] * res.right[i];
    den += res.right[i] * res.right[i];
  }
  const double lambda = num / den;
  res.log_eigenvalue = std::log(lambda) + log_scale;
  res.eigenvalue = std::exp(res.log_eigenvalue);
  normalize(res.right, normalization);
  normalize(res.left, normalization);
  return res;
}

PerronResult perron(const Matrix& m, Normalization normalization) {
  const double top = m.max_entry();
  if (!(top > 0.0)) throw ConvergenceFailure("perron: zero matrix");
  Matrix scaled = m;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) scaled(i, j) /= top;
  return perron_scaled(scaled, std::log(top), normalization);
}

std::vector<double> stationary_distribution(const TransitionModel& model) {
  return perron(model.kernel, Normalization::kSumOne).right;
}

AssumptionReport check_assumption(const TransitionModel& model, Assumption which, double tol) {
  AssumptionReport rep;
  rep.assumption = which;
  const int nx = model.x_size, ny = model.y_size;
  auto w = [&](int x, int y, int xp, int yp) {
    return model.kernel(model.index(x, y), model.index(xp, yp));
  };
  auto note = [&](double dev, int xp, int xq, int yp, int y) {
    if (dev > rep.max_deviation) {
      rep.max_deviation = dev;
      rep.witness = {xp, xq, yp, y};
      rep.has_witness = true;
    }
  };
  for (int yp = 0; yp < ny; ++yp) {
    for (int y = 0; y < ny; ++y) {
      std::vector<double> mass(nx, 0.0);
      for (int xp = 0; xp < nx; ++xp)
        for (int x = 0; x < nx; ++x) mass[xp] += w(x, y, xp, yp);
      for (int xp = 1; xp < nx; ++xp) note(std::fabs(mass[xp] - mass[0]), 0, xp, yp, y);
      if (which == Assumption::kA1) continue;
      std::vector<std::vector<double>> sorted(nx, std::vector<double>(nx, 0.0));
      for (int xp = 0; xp < nx; ++xp) {
        for (int x = 0; x < nx; ++x) {
          sorted[xp][x] = mass[xp] > 0.0 ? w(x, y, xp, yp) / mass[xp] : 0.0;
        }
        std::sort(sorted[xp].begin(), sorted[xp].end());
      }
      for (int xp = 1; xp < nx; ++xp) {
        if (mass[xp] == 0.0 || mass[0] == 0.0) continue;
        double dev = 0.0;
        for (int x = 0; x < nx; ++x) dev = std::max(dev, std::fabs(sorted[xp][x] - sorted[0][x]));
        note(dev, 0, xp, yp, y);
      }
    }
  }
  rep.holds = rep.max_deviation <= tol;
  if (rep.holds) rep.has_witness = false;
  return rep;
}

void require_assumption(const TransitionModel& model, Assumption which) {
  const auto rep = check_assumption(model, which);
  if (!rep.holds) {
    std::ostringstream os;
    os << (which == Assumption::kA1 ? "A1" : "A2") << " fails with deviation " << rep.max_deviation
       << " at (x'=" << rep.witness[0] << ", x~'=" << rep.witness[1] << ", y'=" << rep.witness[2]
       << ", y=" << rep.witness[3] << ")";
    throw AssumptionViolated(os.str());
  }
}

Matrix y_kernel(const TransitionModel& model) {
  require_assumption(model, Assumption::kA1);
  const int ny = model.y_size;
  Matrix wy(ny, ny);
  for (int yp = 0; yp < ny; ++yp)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < model.x_size; ++x)
        wy(y, yp) += model.kernel(model.index(x, y), model.index(0, yp));
  return wy;
}

Matrix tilted_matrix(const TransitionModel& model, double theta, TiltVariant variant) {
  if (!(theta > -1.0)) throw std::invalid_argument("tilted_matrix: theta must exceed -1");
  const int k = model.states();
  Matrix out(k, k);
  Matrix wy;
  if (variant == TiltVariant::kLowerCond) wy = y_kernel(model);
  for (int s = 0; s < k; ++s) {
    for (int sp = 0; sp < k; ++sp) {
      const double v = model.kernel(s, sp);
      if (v == 0.0) continue;
      if (theta == 0.0) {
        out(s, sp) = v;
      } else if (variant == TiltVariant::kSingle) {
        out(s, sp) = std::pow(v, 1.0 + theta);
      } else {
        const double m = wy(model.y_of(s), model.y_of(sp));
        out(s, sp) = std::pow(v, 1.0 + theta) * std::pow(m, -theta);
      }
    }
  }
  return out;
}

std::vector<int> sample_path(const TransitionModel& model, int64_t n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_path: n must be positive");
  const int k = model.states();
  std::vector<std::vector<double>> cdf(k, std::vector<double>(k));
  for (int sp = 0; sp < k; ++sp) {
    double acc = 0.0;
    for (int s = 0; s < k; ++s) {
      acc += model.kernel(s, sp);
      cdf[sp][s] = acc;
    }
  }
  std::vector<double> init_cdf(k);
  std::partial_sum(model.initial.begin(), model.initial.end(), init_cdf.begin());

  // Rounding can leave the final cumulative value just below 1; the
  // fallback is the last state carrying positive mass.
  auto last_positive = [k](const std::vector<double>& c) {
    int last = 0;
    for (int s = 0; s < k; ++s)
      if (c[s] > (s == 0 ? 0.0 : c[s - 1])) last = s;
    return last;
  };
  std::vector<int> fallback(k);
  for (int sp = 0; sp < k; ++sp) fallback[sp] = last_positive(cdf[sp]);
  const int init_fallback = last_positive(init_cdf);

  std::mt19937_64 rng(seed);
  auto draw = [&](const std::vector<double>& c, int last) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    for (int s = 0; s < last; ++s)
      if (u < c[s]) return s;
    return last;
  };
  std::vector<int> path(static_cast<size_t>(n));
  path[0] = draw(init_cdf, init_fallback);
  for (int64_t i = 1; i < n; ++i) path[i] = draw(cdf[path[i - 1]], fallback[path[i - 1]]);
  return path;
}

}  // namespace markovrng
