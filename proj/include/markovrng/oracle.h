#ifndef MARKOVRNG_ORACLE_H_
#define MARKOVRNG_ORACLE_H_

#include <cstdint>
#include <vector>

#include "markovrng/legendre.h"
#include "markovrng/markov_core.h"
#include "markovrng/matrix.h"
#include "markovrng/renyi.h"

namespace markovrng {

// Outcome budget shared by every enumeration.
inline constexpr int64_t kEnumerationBudget = int64_t{1} << 24;

// Exact law of the joint state sequence s_1..s_n. Outcomes are indexed
// little-endian: o = sum_t s_t * S^(t-1) with S = |X||Y|.
struct ExactDistribution {
  int n = 0;
  int x_size = 0;
  int y_size = 1;
  std::vector<double> probabilities;
  std::vector<double> log_probs;  // -inf on impossible outcomes
  int64_t flushed = 0;            // outcomes below e^-700 set to zero

  int64_t size() const { return static_cast<int64_t>(probabilities.size()); }
  int64_t x_outcomes() const;
  int64_t y_outcomes() const;
  // Index of x^n (resp. y^n) inside outcome o, little-endian in |X| (|Y|).
  int64_t x_code(int64_t outcome) const;
  int64_t y_code(int64_t outcome) const;

  std::vector<double> x_marginal() const;
  std::vector<double> y_marginal() const;
  // Matrix(|X|^n, |Y|^n) of P_{X^n Y^n}.
  Matrix joint_matrix() const;
  // Marginal of the state at position t (0-based).
  std::vector<double> position_marginal(int t) const;
};

// Throws BudgetExceeded when (|X||Y|)^n exceeds kEnumerationBudget.
ExactDistribution enumerate(const TransitionModel& model, int n);

// n-letter entropies in nats:
//   kSingle    H_{1+theta}(X^n Y^n) (the whole joint state)
//   kLower     H^down_{1+theta}(X^n | Y^n)
//   kUpper     H^up_{1+theta}(X^n | Y^n)
//   kTwoParam  H_{1+theta, 1+theta'}(X^n | Y^n)
// theta = +inf gives the matching min-entropy.
double exact_renyi_n(const TransitionModel& model, int n, double theta, Variant variant,
                     double theta_prime = 0.0);
double exact_renyi_n(const ExactDistribution& dist, double theta, Variant variant, double theta_prime = 0.0);

// P{-log P(S^n) >= gamma} (kUpper) or P{-log P(S^n) <= gamma} (kLower).
double exact_tail(const TransitionModel& model, int n, double gamma, TailDirection direction);
double exact_tail(const ExactDistribution& dist, double gamma, TailDirection direction);

struct OptimalDelta {
  double value = 0.0;
  bool exhaustive = true;  // false: greedy fallback, not a certified minimum
  int64_t visited = 0;
};

inline constexpr double kOptimalDeltaBudget = 1e7;

// min over f: supp P -> {0..M-1} of the variational distance of P_{f(X)} to
// uniform. Exhaustive when M^|supp| <= kOptimalDeltaBudget.
OptimalDelta optimal_delta(const std::vector<double>& p, int M);

struct SandwichReport {
  bool holds = false;
  double exact = 0.0;       // the n-letter quantity being bracketed
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double slack_low = 0.0;   // exact - lower_bound
  double slack_high = 0.0;  // upper_bound - exact
};

inline constexpr double kSandwichTolerance = 1e-9;

// Brackets, with c = corrections:
//   kDelta     theta H_{1+theta}(X^n) (H^down for joint models)
//   kXi        theta/(1+theta) H^up_{1+theta}(X^n|Y^n)
//   kZeta      theta H_{1+theta,1+theta'}(X^n|Y^n)
//   kDeltaInf  H_inf(X^n)
// each between (n-1) * rate-term + c.lower and (n-1) * rate-term + c.upper.
SandwichReport verify_sandwich(const TransitionModel& model, int n, double theta, CorrectionKind kind,
                               double theta_prime = 0.0);

}  // namespace markovrng

#endif  // MARKOVRNG_ORACLE_H_
