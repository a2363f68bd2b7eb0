#ifndef MARKOVRNG_MARKOV_CORE_H_
#define MARKOVRNG_MARKOV_CORE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "markovrng/errors.h"
#include "markovrng/matrix.h"

namespace markovrng {

// Tolerance used for stochasticity checks of kernels and initial vectors.
inline constexpr double kStochasticTol = 1e-12;

enum class Convention { kToFrom, kFromTo };

// Markov source on X (y_size == 1) or on the joint alphabet X x Y.
// Joint states are indexed as s = x * y_size + y. The kernel is stored in
// (to, from) orientation: kernel(s, s') = W(s | s').
struct TransitionModel {
  int x_size = 0;
  int y_size = 1;
  Matrix kernel;
  std::vector<double> initial;
  int period = 1;

  int states() const { return x_size * y_size; }
  int index(int x, int y) const { return x * y_size + y; }
  int x_of(int s) const { return s / y_size; }
  int y_of(int s) const { return s % y_size; }
  bool single_terminal() const { return y_size == 1; }
};

// Validates and builds a model. `kernel` is interpreted in `convention`.
// Throws NotStochastic (index = offending column, -1 for the initial
// vector), NotIrreducible or MalformedDocument.
TransitionModel make_model(int x_size, int y_size, const Matrix& kernel,
                           const std::vector<double>& initial,
                           Convention convention = Convention::kToFrom);

// Builds a single-terminal model from (to, from) rows.
TransitionModel make_model(const std::vector<std::vector<double>>& kernel,
                           const std::vector<double>& initial);

// JSON document: {"x_size", "y_size", "convention", "kernel", "initial"}.
TransitionModel parse_model(const std::string& document);
TransitionModel load_model(const std::string& path);
std::string model_to_json(const TransitionModel& model);

bool is_irreducible(const Matrix& kernel);
// gcd of cycle lengths of the support graph (kernel must be irreducible).
int period_of(const Matrix& kernel);

enum class Normalization { kSumOne, kMinEntryOne };

struct PerronResult {
  double eigenvalue = 0.0;
  // log of the eigenvalue; stays finite when the eigenvalue underflows.
  double log_eigenvalue = 0.0;
  std::vector<double> right;  // M r = lambda r
  std::vector<double> left;   // l^T M = lambda l^T
  Normalization normalization = Normalization::kSumOne;
  int iterations = 0;
};

inline constexpr int kPerronMaxIterations = 100000;
inline constexpr double kPerronTolerance = 1e-14;

// Dominant eigenpair of a nonnegative irreducible matrix by shifted power
// iteration. Throws ConvergenceFailure after kPerronMaxIterations.
PerronResult perron(const Matrix& m, Normalization normalization = Normalization::kSumOne);

// Same as perron() for the matrix exp(log_scale) * scaled.
PerronResult perron_scaled(const Matrix& scaled, double log_scale,
                           Normalization normalization = Normalization::kSumOne);

std::vector<double> stationary_distribution(const TransitionModel& model);

// Y-marginal kernel W_Y(y | y') (y_size x y_size). Requires A1.
Matrix y_kernel(const TransitionModel& model);

enum class TiltVariant { kSingle, kLowerCond };

// Elementwise W^{1+theta} (single) or W^{1+theta} W_Y^{-theta} (lower_cond).
Matrix tilted_matrix(const TransitionModel& model, double theta,
                     TiltVariant variant = TiltVariant::kSingle);

enum class Assumption { kA1, kA2 };

struct AssumptionReport {
  Assumption assumption = Assumption::kA1;
  bool holds = true;
  double max_deviation = 0.0;
  bool has_witness = false;
  // (x', x~', y', y): the two previous X values whose columns disagree.
  std::array<int, 4> witness = {0, 0, 0, 0};
};

AssumptionReport check_assumption(const TransitionModel& model, Assumption which,
                                  double tol = kStochasticTol);

// Throws AssumptionViolated if the assumption does not hold.
void require_assumption(const TransitionModel& model, Assumption which);

// Joint-state path of length n; X_1 ~ initial, X_{i+1} ~ kernel(., X_i).
std::vector<int> sample_path(const TransitionModel& model, int64_t n, uint64_t seed);

}  // namespace markovrng

#endif  // MARKOVRNG_MARKOV_CORE_H_
