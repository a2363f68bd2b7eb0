#ifndef MARKOVRNG_RENYI_H_
#define MARKOVRNG_RENYI_H_

#include <limits>
#include <vector>

#include "markovrng/markov_core.h"
#include "markovrng/matrix.h"

namespace markovrng {

// |theta| below this is routed to the theta -> 0 limit.
inline constexpr double kThetaZero = 1e-6;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Single-shot measures. Joint distributions are Matrix(x_size, y_size).

double shannon_entropy(const std::vector<double>& p);
// -(1/theta) log sum p^{1+theta}; theta = 0 gives Shannon, +inf gives min.
double renyi_entropy(const std::vector<double>& p, double theta);
double min_entropy(const std::vector<double>& p);
// Largest -log max P' over sub-normalized P' with (1/2)||P - P'||_1 <= eps.
double smooth_min_entropy(const std::vector<double>& p, double eps);

enum class CondVariant { kLower, kUpper, kTwoParam };

double cond_shannon(const Matrix& pxy);
double cond_renyi(const Matrix& pxy, double theta, CondVariant variant, double theta_prime = 0.0);
// H_{1+theta}(P_XY | Q_Y). Throws SupportViolation if supp P_Y is not in supp Q_Y.
double relative_cond_renyi(const Matrix& pxy, const std::vector<double>& qy, double theta);
// Optimizer P_Y^{(1+theta)}(y) proportional to [sum_x P_XY(x,y)^{1+theta}]^{1/(1+theta)}.
std::vector<double> optimal_conditioning(const Matrix& pxy, double theta);

enum class MinVariant { kPlain, kLower, kUpper };
double cond_min_entropy(const Matrix& pxy, MinVariant variant);

// ---------------------------------------------------------------------------
// Curves theta -> theta * H_{1+theta}. Concave, derivative decreasing.

class ThetaCurve {
 public:
  virtual ~ThetaCurve() = default;
  // theta * H_{1+theta}; smooth through theta = 0.
  virtual double scaled(double theta) const = 0;
  // d/dtheta [theta * H_{1+theta}].
  virtual double derivative(double theta) const = 0;
  // H_{1+theta}; the theta -> 0 limit is derivative(0).
  double rate(double theta) const;
  // Second derivative of theta H at 0, negated (variance).
  virtual double variance() const;
};

// Single-shot curve of an explicit distribution (lower or upper conditional
// when a joint matrix is given).
class DistributionCurve : public ThetaCurve {
 public:
  explicit DistributionCurve(const std::vector<double>& p);
  DistributionCurve(const Matrix& pxy, CondVariant variant);
  double scaled(double theta) const override;
  double derivative(double theta) const override;

 private:
  Matrix pxy_;
  CondVariant variant_;
};

// ---------------------------------------------------------------------------
// Transition-matrix measures.

enum class Variant { kSingle, kLower, kUpper, kTwoParam };

struct CorrectionTerms {
  double lower = 0.0;
  double upper = 0.0;
};

struct ProfilePoint {
  double scaled = 0.0;
  CorrectionTerms corrections;
};

// theta -> H^W_{1+theta} for one variant of a model. kSingle treats the
// whole (joint) state as the source; kLower needs A1; kUpper and kTwoParam
// need A2. For kTwoParam the second order theta' is fixed at construction.
class RenyiProfile : public ThetaCurve {
 public:
  RenyiProfile(const TransitionModel& model, Variant variant, double theta_prime = 0.0);

  double scaled(double theta) const override;
  double derivative(double theta) const override;

  double entropy_rate() const { return derivative(0.0); }
  // delta (single/lower), xi (upper) or zeta (two-param).
  CorrectionTerms corrections(double theta) const;
  // scaled(theta) and corrections(theta) from a single eigen-solve.
  ProfilePoint evaluate(double theta) const;
  // log of the Perron-Frobenius eigenvalue of the tilted matrix at theta.
  double log_eigenvalue(double theta) const;

  Variant variant() const { return variant_; }
  double theta_prime() const { return theta_prime_; }
  const TransitionModel& model() const { return model_; }

 private:
  struct Spectral {
    PerronResult perron;
    Matrix scaled;
    double log_scale = 0.0;
  };
  Matrix log_matrix(double theta) const;
  Spectral spectral(double theta, Normalization normalization) const;
  double log_wy_theta(int y, int yp, double theta) const;
  double scaled_from_log(double theta, double log_eigenvalue) const;

  TransitionModel model_;
  Variant variant_;
  double theta_prime_;
  Matrix log_w_;   // log W(s|s'), -inf on zeros
  Matrix log_wy_;  // log W_Y(y|y') (lower)
  double log_kappa_prime_ = 0.0;  // log kappa_{theta'} (two-param)
  CorrectionTerms xi_prime_;       // xi(theta') (two-param)
};

double renyi_rate(const TransitionModel& model, double theta, Variant variant,
                  double theta_prime = 0.0);
double entropy_rate(const TransitionModel& model, bool conditional = false);
double variance_rate(const TransitionModel& model, bool conditional = false);

struct MinEntropyCertificate {
  double rate = 0.0;
  std::vector<int> best_cycle;  // states visited, first state repeated implicitly
  int cycle_length = 0;
  double path_constant = 1.0;   // A; 1 for a single state
};

inline constexpr int kMaxCycleStates = 10;

// Throws StateSpaceTooLarge (single/lower, > kMaxCycleStates states) or
// AssumptionViolated.
MinEntropyCertificate min_entropy_rate(const TransitionModel& model, MinVariant variant);

enum class CorrectionKind { kDelta, kXi, kZeta, kDeltaInf };

CorrectionTerms correction_terms(const TransitionModel& model, CorrectionKind kind, double theta,
                                 double theta_prime = 0.0);

}  // namespace markovrng

#endif  // MARKOVRNG_RENYI_H_
