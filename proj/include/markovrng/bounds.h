#ifndef MARKOVRNG_BOUNDS_H_
#define MARKOVRNG_BOUNDS_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "markovrng/legendre.h"
#include "markovrng/markov_core.h"
#include "markovrng/renyi.h"

namespace markovrng {

// Standard Gaussian cdf and quantile.
struct StdNormal {
  static double cdf(double x);
  static double quantile(double p);
};

// ---------------------------------------------------------------------------
// Single-shot bounds on Delta (optimal function) and Delta-bar (universal
// hash family average). Values are probabilities.

enum class SingleShotKind {
  kHan,            // Delta upper
  kLeftoverLoose,  // Delta-bar upper
  kExpAch,         // Delta-bar upper
  kSphereConv,     // Delta lower
  kHanConv,        // Delta lower
  kStrongConv,     // Delta-bar lower, strong universal family, best Omega
  kStrongTail,     // Delta-bar lower, tail form with nu
  kInfoSpectrum,   // side information, Delta-bar upper
  kExpAchMulti,    // side information, Delta-bar upper
  kSphereConvMulti,  // side information, Delta lower
  kStrongTailMulti,  // side information, Delta-bar lower
};

std::string single_shot_kind_name(SingleShotKind kind);
SingleShotKind parse_single_shot_kind(const std::string& name);
bool is_converse(SingleShotKind kind);

struct SingleShotResult {
  double value = 0.0;
  double gamma_star = 0.0;
  double theta_star = 0.0;
  bool clamped = false;  // achievability value >= 1
};

struct SingleShotOptions {
  double nu = 0.5;
  std::vector<double> q_y;  // info_spectrum conditioning; empty means P_Y
};

// Joint distributions are Matrix(x_size, y_size); a plain distribution is a
// single column. Throws Infeasible for converses without an informative gamma.
SingleShotResult single_shot_bound(const Matrix& pxy, double M, SingleShotKind kind,
                                   const SingleShotOptions& options = {});
SingleShotResult single_shot_bound(const std::vector<double>& p, double M, SingleShotKind kind,
                                   const SingleShotOptions& options = {});

// ---------------------------------------------------------------------------
// Finite-length Markov bounds.

enum class Quantity {
  kNegLogDeltaBarLower,
  kNegLogDeltaUpper,
  kNegLogDeltaBarUpper,
  kRerUpper,
  kRerLower,
  kMmirUpper,
  kMmirLower,
};
std::string quantity_name(Quantity q);

enum class Theorem {
  kAch,
  kConvSphere,
  kConvStrong,
  kAchA1,
  kAchA2,
  kConvA1,
  kConvA2,
};
std::string theorem_name(Theorem t);
Theorem parse_theorem(const std::string& name);

struct BoundQuery {
  int64_t n = 2;
  double log_m = 0.0;  // log M_n; rate R = log_m / n
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  double nu = 0.5;
  static BoundQuery from_rate(int64_t n, double rate);
};

struct BoundReport {
  std::string theorem;
  Quantity quantity = Quantity::kNegLogDeltaBarLower;
  std::optional<double> value;  // absent when infeasible
  double theta_star = std::numeric_limits<double>::quiet_NaN();
  double s_star = std::numeric_limits<double>::quiet_NaN();
  double theta_tilde_star = std::numeric_limits<double>::quiet_NaN();
  bool feasible = true;
  bool clamped = false;
  int64_t n = 0;
  double rate = 0.0;  // (1/n) log M_n
  double epsilon = std::numeric_limits<double>::quiet_NaN();
};

std::string report_to_json(const BoundReport& report);

// Throws OutOfWindow or DegenerateVariance. A tail search without an
// admissible point yields feasible = false rather than an exception.
BoundReport urng_markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query);
// Throws AssumptionViolated in addition.
BoundReport surng_markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query);
// Dispatches on the theorem family.
BoundReport markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query);

enum class RateDirection { kUpper, kLower };

// Per-symbol bounds on (1/n) D-bar(e^{nR}) and (1/n) D(e^{nR}). When theta is
// absent it is optimized over (0, 1].
BoundReport urng_rer_bound(const TransitionModel& model, int64_t n, double R, RateDirection direction,
                           std::optional<double> theta = std::nullopt);
BoundReport surng_mmir_bound(const TransitionModel& model, int64_t n, double R, RateDirection direction,
                             std::optional<double> theta = std::nullopt);

// ---------------------------------------------------------------------------
// Asymptotic regimes.

enum class Regime {
  kLdAch,         // sup_{0<=theta<=1} (theta H - theta R)/(1+theta)
  kLdConv,        // Delta-bar converse, closed form through theta(a(R))
  kLdConvSphere,  // Delta converse, -theta(R) R + theta(R) H_{1+theta(R)}
  kMd,            // delta^2 / (2 V)
  kSecondOrder,   // n H + sqrt(n V) Phi^{-1}(eps), as log M
  kRer,           // [R - H]_+
};
std::string regime_name(Regime r);
Regime parse_regime(const std::string& name);

enum class Source { kPlain, kLowerCond, kUpperCond };

struct AsymptoticParams {
  double R = 0.0;
  double delta = 0.0;
  int64_t n = 0;
  double epsilon = 0.5;
  Source source = Source::kPlain;
};

struct AsymptoticResult {
  double value = 0.0;
  double theta_star = std::numeric_limits<double>::quiet_NaN();
  bool matches_above_critical = false;  // LD: R >= R_cr
  double critical_rate = std::numeric_limits<double>::quiet_NaN();
};

AsymptoticResult asymptotic(const TransitionModel& model, Regime regime, const AsymptoticParams& params);

// R (nats per symbol) at which the chosen bound meets epsilon.
struct RatePoint {
  double rate = 0.0;
  BoundReport report;
};
RatePoint rate_for_epsilon(const TransitionModel& model, int64_t n, double epsilon, Theorem theorem);

}  // namespace markovrng

#endif  // MARKOVRNG_BOUNDS_H_
