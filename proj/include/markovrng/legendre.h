#ifndef MARKOVRNG_LEGENDRE_H_
#define MARKOVRNG_LEGENDRE_H_

#include <cstdint>
#include <functional>
#include <vector>

#include "markovrng/renyi.h"

namespace markovrng {

// Bisection bracket for theta(a).
inline constexpr double kThetaMin = -0.999;
inline constexpr double kThetaMax = 50.0;
inline constexpr double kMinVariance = 1e-12;

double theta_derivative(const ThetaCurve& curve, double theta);

// Inverse maps of a ThetaCurve. Holds a reference: the curve must outlive it.
//   theta(a): derivative(theta(a)) = a
//   R(a) = (1 + theta(a)) a - theta(a) H_{1+theta(a)}
class InverseMaps {
 public:
  // Throws DegenerateVariance when the variance is <= kMinVariance.
  explicit InverseMaps(const ThetaCurve& curve);

  double theta_of_a(double a) const;
  double R_of_a(double a) const;
  double a_of_R(double R) const;
  // theta(a(R)) in one bisection, using that R(theta) is decreasing in theta.
  double theta_of_R(double R) const;
  // R as a function of theta along the curve.
  double R_of_theta(double theta) const;

  double a_lower() const { return a_lower_; }  // derivative at kThetaMax
  double a_upper() const { return a_upper_; }  // derivative at kThetaMin
  double R_lower() const { return R_lower_; }  // R(a_lower)
  double critical_rate() const { return critical_rate_; }
  double entropy() const { return entropy_; }
  double variance() const { return variance_; }
  const ThetaCurve& curve() const { return curve_; }

 private:
  const ThetaCurve& curve_;
  double a_lower_, a_upper_, R_lower_, critical_rate_, entropy_, variance_;
};

InverseMaps build_inverse_maps(const ThetaCurve& curve);

struct LegendreResult {
  double exponent = 0.0;
  double theta_star = 0.0;
};

// sup over theta >= 0 (theta in [0,1] when constrained) of
// (theta H_{1+theta} - theta R) / (1 + theta), by direct maximization.
LegendreResult legendre_sup(const ThetaCurve& curve, double R, bool constrained);
// Closed form -theta(a(R)) a(R) + theta(a(R)) H_{1+theta(a(R))}.
LegendreResult legendre_closed_form(const InverseMaps& maps, double R);

// ---------------------------------------------------------------------------
// Tail-probability converse machinery.

// phi(rho) together with the finite-length corrections of the CGF:
// (n-1) phi + lower <= phi_n <= (n-1) phi + upper.
struct CgfPoint {
  double phi = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct CgfSpec {
  std::function<CgfPoint(double)> point;
  std::function<double(double)> dphi;
  double mean = 0.0;
  double rho_min = -kThetaMax;
  double rho_max = kThetaMax;
};

// CGF of Z with P(Z = values[i]) = probs[i] (corrections are zero).
CgfSpec discrete_cgf(const std::vector<double>& values, const std::vector<double>& probs);

// CGF of S_n = sum_{i>=2} g(Z_i, Z_{i-1}) + g~(Z_1) for a Markov chain with
// kernel (to, from); g is indexed (to, from) and only used on the support.
CgfSpec markov_cgf(const Matrix& kernel, const Matrix& g, const std::vector<double>& initial,
                   const std::vector<double>& g_initial);

// S_n = -log P(X^n) of a model (joint state when y_size > 1).
CgfSpec log_likelihood_cgf(const TransitionModel& model);

// CGF of log P along a profile: phi(rho) = -rho H_{1+rho}, with corrections
// (-delta_upper, -delta_lower). Domain rho in [kThetaMin, kThetaMax].
CgfSpec profile_cgf(const RenyiProfile& profile);

enum class TailDirection { kUpper, kLower };  // {Z >= a}, {Z <= a}

struct TailBound {
  double value = 0.0;  // upper bound on -log P
  double rho_star = 0.0;
  double s_star = 0.0;
  double rho_a = 0.0;
  bool feasible = false;
};

// Throws NoFeasiblePoint when the search finds no admissible (s, rho~).
TailBound one_shot_tail_converse(const CgfSpec& cgf, double a, TailDirection direction);
TailBound markov_tail_converse(const CgfSpec& cgf, double a, int64_t n, TailDirection direction);

double rho_of_a(const CgfSpec& cgf, double a);

// Shared 2-D minimization of the tail-converse objective. `bulk` multiplies
// the per-letter terms, `edge` multiplies the single extra letter that the
// correction constants account for (1 for Markov sums, 0 for one-shot).
struct TailProblem {
  std::function<CgfPoint(double)> point;
  double a = 0.0;
  double rho_a = 0.0;
  double bulk = 1.0;
  double edge = 0.0;
  int sign = 1;  // +1: rho~ > rho_a, -1: rho~ < rho_a
  double rho_min = -kThetaMax;
  double rho_max = kThetaMax;
  // Optional warm start for the local search; the grid is skipped when the
  // start is admissible.
  double warm_s = 0.0;
  double warm_d = 0.0;
};

// Returns feasible = false when no grid point is admissible.
TailBound minimize_tail(const TailProblem& problem);

}  // namespace markovrng

#endif  // MARKOVRNG_LEGENDRE_H_
