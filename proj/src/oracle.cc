#include "markovrng/oracle.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "markovrng/errors.h"

namespace markovrng {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFlushLog = -700.0;

double lse(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

int64_t ipow(int64_t base, int e) {
  int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

int64_t checked_outcomes(int64_t alphabet, int n) {
  int64_t r = 1;
  for (int i = 0; i < n; ++i) {
    r *= alphabet;
    if (r > kEnumerationBudget) {
      throw BudgetExceeded(std::to_string(alphabet) + "^" + std::to_string(n) + " outcomes exceed 2^24");
    }
  }
  return r;
}

}  // namespace

int64_t ExactDistribution::x_outcomes() const { return ipow(x_size, n); }
int64_t ExactDistribution::y_outcomes() const { return ipow(y_size, n); }

int64_t ExactDistribution::x_code(int64_t outcome) const {
  const int64_t S = int64_t{x_size} * y_size;
  int64_t code = 0, scale = 1;
  for (int t = 0; t < n; ++t) {
    code += (outcome % S) / y_size * scale;
    outcome /= S;
    scale *= x_size;
  }
  return code;
}

int64_t ExactDistribution::y_code(int64_t outcome) const {
  const int64_t S = int64_t{x_size} * y_size;
  int64_t code = 0, scale = 1;
  for (int t = 0; t < n; ++t) {
    code += (outcome % S) % y_size * scale;
    outcome /= S;
    scale *= y_size;
  }
  return code;
}

std::vector<double> ExactDistribution::x_marginal() const {
  std::vector<double> out(x_outcomes(), 0.0);
  for (int64_t o = 0; o < size(); ++o)
    if (probabilities[o] > 0.0) out[x_code(o)] += probabilities[o];
  return out;
}

std::vector<double> ExactDistribution::y_marginal() const {
  std::vector<double> out(y_outcomes(), 0.0);
  for (int64_t o = 0; o < size(); ++o)
    if (probabilities[o] > 0.0) out[y_code(o)] += probabilities[o];
  return out;
}

Matrix ExactDistribution::joint_matrix() const {
  Matrix m(static_cast<int>(x_outcomes()), static_cast<int>(y_outcomes()));
  for (int64_t o = 0; o < size(); ++o)
    if (probabilities[o] > 0.0) m(static_cast<int>(x_code(o)), static_cast<int>(y_code(o))) += probabilities[o];
  return m;
}

std::vector<double> ExactDistribution::position_marginal(int t) const {
  const int64_t S = int64_t{x_size} * y_size;
  const int64_t stride = ipow(S, t);
  std::vector<double> out(S, 0.0);
  for (int64_t o = 0; o < size(); ++o) out[(o / stride) % S] += probabilities[o];
  return out;
}

ExactDistribution enumerate(const TransitionModel& model, int n) {
  if (n < 1) throw std::invalid_argument("enumeration needs n >= 1");
  const int S = model.states();
  const int64_t total = checked_outcomes(S, n);
  ExactDistribution d;
  d.n = n;
  d.x_size = model.x_size;
  d.y_size = model.y_size;

  Matrix log_w(S, S);
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) log_w(i, j) = model.kernel(i, j) > 0.0 ? std::log(model.kernel(i, j)) : kNegInf;

  std::vector<double> lp(total, kNegInf);
  for (int s = 0; s < S; ++s) lp[s] = model.initial[s] > 0.0 ? std::log(model.initial[s]) : kNegInf;
  // Extend prefixes of length t by the symbol at position t (the top digit).
  int64_t len = S, top = 1;
  for (int t = 1; t < n; ++t) {
    for (int s = S - 1; s >= 0; --s) {
      for (int64_t o = 0; o < len; ++o) {
        const double base = lp[o];
        const int last = static_cast<int>(o / top);
        lp[o + s * len] = base == kNegInf ? kNegInf : base + log_w(s, last);
      }
    }
    top = len;
    len *= S;
  }

  d.probabilities.resize(total);
  for (int64_t o = 0; o < total; ++o) {
    if (lp[o] < kFlushLog) {
      if (lp[o] != kNegInf) ++d.flushed;
      d.probabilities[o] = 0.0;
    } else {
      d.probabilities[o] = std::exp(lp[o]);
    }
  }
  d.log_probs = std::move(lp);
  return d;
}

double exact_renyi_n(const TransitionModel& model, int n, double theta, Variant variant, double theta_prime) {
  return exact_renyi_n(enumerate(model, n), theta, variant, theta_prime);
}

double exact_renyi_n(const ExactDistribution& dist, double theta, Variant variant, double theta_prime) {
  const bool min_entropy = std::isinf(theta) && theta > 0.0;
  if (variant == Variant::kSingle) {
    if (min_entropy) return -*std::max_element(dist.log_probs.begin(), dist.log_probs.end());
    if (std::fabs(theta) < kThetaZero) return shannon_entropy(dist.probabilities);
    // -(1/theta) log sum P^{1+theta}, accumulated in log space
    std::vector<double> terms;
    terms.reserve(dist.log_probs.size());
    for (double l : dist.log_probs)
      if (l != kNegInf) terms.push_back((1.0 + theta) * l);
    return -lse(terms) / theta;
  }
  const Matrix pxy = dist.joint_matrix();
  if (min_entropy) {
    const MinVariant mv = variant == Variant::kLower ? MinVariant::kLower : MinVariant::kUpper;
    return cond_min_entropy(pxy, mv);
  }
  switch (variant) {
    case Variant::kLower:
      return cond_renyi(pxy, theta, CondVariant::kLower);
    case Variant::kUpper:
      return cond_renyi(pxy, theta, CondVariant::kUpper);
    case Variant::kTwoParam:
      return cond_renyi(pxy, theta, CondVariant::kTwoParam, theta_prime);
    default:
      break;
  }
  throw std::invalid_argument("unhandled variant");
}

double exact_tail(const TransitionModel& model, int n, double gamma, TailDirection direction) {
  return exact_tail(enumerate(model, n), gamma, direction);
}

double exact_tail(const ExactDistribution& dist, double gamma, TailDirection direction) {
  double mass = 0.0;
  for (int64_t o = 0; o < dist.size(); ++o) {
    if (dist.log_probs[o] == kNegInf) continue;
    const double z = -dist.log_probs[o];
    if (direction == TailDirection::kUpper ? z >= gamma : z <= gamma) mass += dist.probabilities[o];
  }
  return std::min(1.0, mass);
}

// ---------------------------------------------------------------------------

namespace {

double bins_distance(const std::vector<double>& bins, double u) {
  double tv = 0.0;
  for (double b : bins) tv += std::max(0.0, b - u);
  return tv;
}

OptimalDelta greedy_delta(const std::vector<double>& p, int M) {
  std::vector<double> bins(M, 0.0);
  for (double x : p) *std::min_element(bins.begin(), bins.end()) += x;
  return {bins_distance(bins, 1.0 / M), false, 1};
}

}  // namespace

OptimalDelta optimal_delta(const std::vector<double>& p, int M) {
  if (M < 1) throw std::invalid_argument("M must be positive");
  std::vector<double> mass;
  for (double x : p)
    if (x > 0.0) mass.push_back(x);
  std::sort(mass.begin(), mass.end(), std::greater<double>());
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  for (double& x : mass) x /= total;

  if (std::pow(static_cast<double>(M), static_cast<double>(mass.size())) > kOptimalDeltaBudget) {
    return greedy_delta(mass, M);
  }

  const double u = 1.0 / M;
  const int k = static_cast<int>(mass.size());
  std::vector<double> suffix(k + 1, 0.0);
  for (int i = k - 1; i >= 0; --i) suffix[i] = suffix[i + 1] + mass[i];

  OptimalDelta best = greedy_delta(mass, M);
  best.exhaustive = true;
  best.visited = 0;
  std::vector<double> bins(M, 0.0);

  // Bins are interchangeable, so element i only opens bin `used` (canonical
  // restricted-growth order). TV = sum of excesses; excess can only grow, and
  // the unplaced mass beyond the total deficit must become excess.
  std::function<void(int, int)> place = [&](int i, int used) {
    ++best.visited;
    double excess = 0.0, deficit = 0.0;
    for (double b : bins) {
      excess += std::max(0.0, b - u);
      deficit += std::max(0.0, u - b);
    }
    const double bound = excess + std::max(0.0, suffix[i] - deficit);
    if (bound >= best.value - 1e-15) return;
    if (i == k) {
      best.value = excess;
      return;
    }
    const int limit = std::min(used + 1, M);
    for (int b = 0; b < limit; ++b) {
      bins[b] += mass[i];
      place(i + 1, std::max(used, b + 1));
      bins[b] -= mass[i];
    }
  };
  place(0, 0);
  return best;
}

// ---------------------------------------------------------------------------

SandwichReport verify_sandwich(const TransitionModel& model, int n, double theta, CorrectionKind kind,
                               double theta_prime) {
  if (n < 1) throw std::invalid_argument("sandwich check needs n >= 1");
  const ExactDistribution dist = enumerate(model, n);
  const double n1 = static_cast<double>(n - 1);
  SandwichReport r;
  CorrectionTerms c;
  double rate_term = 0.0;

  switch (kind) {
    case CorrectionKind::kDelta: {
      const Variant v = model.single_terminal() ? Variant::kSingle : Variant::kLower;
      const RenyiProfile prof(model, v);
      const ProfilePoint pp = prof.evaluate(theta);
      rate_term = pp.scaled;
      c = pp.corrections;
      r.exact = theta * exact_renyi_n(dist, theta, v);
      break;
    }
    case CorrectionKind::kXi: {
      const RenyiProfile prof(model, Variant::kUpper);
      const ProfilePoint pp = prof.evaluate(theta);
      rate_term = pp.scaled / (1.0 + theta);
      c = pp.corrections;
      r.exact = theta / (1.0 + theta) * exact_renyi_n(dist, theta, Variant::kUpper);
      break;
    }
    case CorrectionKind::kZeta: {
      const RenyiProfile prof(model, Variant::kTwoParam, theta_prime);
      const ProfilePoint pp = prof.evaluate(theta);
      rate_term = pp.scaled;
      c = pp.corrections;
      r.exact = theta * exact_renyi_n(dist, theta, Variant::kTwoParam, theta_prime);
      break;
    }
    case CorrectionKind::kDeltaInf: {
      rate_term = min_entropy_rate(model, MinVariant::kPlain).rate;
      c = correction_terms(model, CorrectionKind::kDeltaInf, 0.0);
      r.exact = exact_renyi_n(dist, kInfinity, Variant::kSingle);
      break;
    }
  }
  r.lower_bound = n1 * rate_term + c.lower;
  r.upper_bound = n1 * rate_term + c.upper;
  r.slack_low = r.exact - r.lower_bound;
  r.slack_high = r.upper_bound - r.exact;
  r.holds = r.slack_low >= -kSandwichTolerance && r.slack_high >= -kSandwichTolerance;
  return r;
}

}  // namespace markovrng
