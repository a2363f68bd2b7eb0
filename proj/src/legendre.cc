#include "markovrng/legendre.h"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <memory>

namespace markovrng {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPenalty = 1e300;

// Root of a decreasing function on [lo, hi]; f(lo) >= 0 >= f(hi) assumed.
template <class F>
double bisect_decreasing(F f, double lo, double hi) {
  boost::math::tools::eps_tolerance<double> tol(48);
  boost::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::bisect([&](double x) { return -f(x); }, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

double log_sum_exp(const std::vector<double>& v) {
  double top = kNegInf;
  for (double e : v) top = std::max(top, e);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double e : v)
    if (e != kNegInf) acc += std::exp(e - top);
  return top + std::log(acc);
}

// Tilted chain kernel K o exp(rho g), scaled by its largest entry.
struct TiltedChain {
  Matrix log_kernel;  // -inf off the support
  Matrix g;
  std::vector<double> log_initial;
  std::vector<double> g_initial;

  std::pair<Matrix, double> scaled(double rho) const {
    const int k = log_kernel.rows();
    Matrix lm(k, k);
    double top = kNegInf;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        const double l = log_kernel(i, j);
        lm(i, j) = l == kNegInf ? kNegInf : l + rho * g(i, j);
        top = std::max(top, lm(i, j));
      }
    Matrix out(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) out(i, j) = lm(i, j) == kNegInf ? 0.0 : std::exp(lm(i, j) - top);
    return {out, top};
  }

  CgfPoint point(double rho) const {
    auto [m, top] = scaled(rho);
    const PerronResult pr = perron_scaled(m, top, Normalization::kMinEntryOne);
    const auto& v = pr.left;
    std::vector<double> terms(v.size());
    for (size_t z = 0; z < v.size(); ++z)
      terms[z] = log_initial[z] == kNegInf ? kNegInf : std::log(v[z]) + log_initial[z] + rho * g_initial[z];
    const double lvw = log_sum_exp(terms);
    CgfPoint p;
    p.phi = pr.log_eigenvalue;
    p.upper = lvw;
    p.lower = lvw - std::log(*std::max_element(v.begin(), v.end()));
    return p;
  }

  double dphi(double rho) const {
    auto [m, top] = scaled(rho);
    const PerronResult pr = perron_scaled(m, top, Normalization::kSumOne);
    const int k = m.rows();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        if (m(i, j) == 0.0) continue;
        const double t = pr.left[i] * m(i, j) * pr.right[j];
        num += t * g(i, j);
        den += t;
      }
    return num / den;
  }
};

// Nelder-Mead over (log s, log d) via GSL.
struct NmContext {
  const std::function<double(double, double)>* objective;
};

double nm_trampoline(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<NmContext*>(params);
  const double v = (*ctx->objective)(std::exp(gsl_vector_get(x, 0)), std::exp(gsl_vector_get(x, 1)));
  return std::isfinite(v) ? v : kPenalty;
}

void nelder_mead(const std::function<double(double, double)>& objective, double& s, double& d,
                 double& best) {
  gsl_set_error_handler_off();
  NmContext ctx{&objective};
  gsl_multimin_function fn;
  fn.n = 2;
  fn.f = nm_trampoline;
  fn.params = &ctx;
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, std::log(s));
  gsl_vector_set(x, 1, std::log(d));
  gsl_vector_set_all(step, 0.25);
  gsl_multimin_fminimizer* nm = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(nm, &fn, x, step);
  for (int it = 0; it < 600; ++it) {
    if (gsl_multimin_fminimizer_iterate(nm) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(nm), 1e-9) == GSL_SUCCESS) break;
  }
  const double v = gsl_multimin_fminimizer_minimum(nm);
  if (v < best) {
    best = v;
    s = std::exp(gsl_vector_get(nm->x, 0));
    d = std::exp(gsl_vector_get(nm->x, 1));
  }
  gsl_multimin_fminimizer_free(nm);
  gsl_vector_free(step);
  gsl_vector_free(x);
}

}  // namespace

double theta_derivative(const ThetaCurve& curve, double theta) { return curve.derivative(theta); }

// ---------------------------------------------------------------------------
// Inverse maps

InverseMaps::InverseMaps(const ThetaCurve& curve) : curve_(curve) {
  variance_ = curve.variance();
  if (!(variance_ > kMinVariance)) {
    throw DegenerateVariance("variance " + std::to_string(variance_) + " leaves theta(a) undefined");
  }
  entropy_ = curve.derivative(0.0);
  a_lower_ = curve.derivative(kThetaMax);
  a_upper_ = curve.derivative(kThetaMin);
  R_lower_ = R_of_theta(kThetaMax);
  critical_rate_ = R_of_theta(1.0);
}

double InverseMaps::R_of_theta(double theta) const {
  return (1.0 + theta) * curve_.derivative(theta) - curve_.scaled(theta);
}

double InverseMaps::theta_of_a(double a) const {
  if (!(a >= a_lower_ && a <= a_upper_)) {
    throw OutOfWindow("a = " + std::to_string(a) + " outside [" + std::to_string(a_lower_) + ", " +
                      std::to_string(a_upper_) + "]");
  }
  return bisect_decreasing([&](double t) { return curve_.derivative(t) - a; }, kThetaMin, kThetaMax);
}

double InverseMaps::R_of_a(double a) const {
  const double t = theta_of_a(a);
  return (1.0 + t) * a - curve_.scaled(t);
}

double InverseMaps::theta_of_R(double R) const {
  const double r_top = R_of_theta(kThetaMin);
  if (!(R >= R_lower_ && R <= r_top)) {
    throw OutOfWindow("R = " + std::to_string(R) + " outside [" + std::to_string(R_lower_) + ", " +
                      std::to_string(r_top) + "]");
  }
  return bisect_decreasing([&](double t) { return R_of_theta(t) - R; }, kThetaMin, kThetaMax);
}

double InverseMaps::a_of_R(double R) const { return curve_.derivative(theta_of_R(R)); }

InverseMaps build_inverse_maps(const ThetaCurve& curve) { return InverseMaps(curve); }

// ---------------------------------------------------------------------------
// Legendre transforms

LegendreResult legendre_sup(const ThetaCurve& curve, double R, bool constrained) {
  const double cap = constrained ? 1.0 : kThetaMax;
  auto f = [&](double t) { return (curve.scaled(t) - t * R) / (1.0 + t); };
  LegendreResult best{0.0, 0.0};  // theta = 0 gives 0
  const double fc = f(cap);
  if (fc > best.exponent) best = {fc, cap};
  boost::uintmax_t iters = 200;
  auto [t, neg] = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, 0.0, cap,
                                                        std::numeric_limits<double>::digits / 2, iters);
  if (-neg > best.exponent) best = {-neg, t};
  return best;
}

LegendreResult legendre_closed_form(const InverseMaps& maps, double R) {
  if (R >= maps.entropy()) return {0.0, 0.0};
  const double t = maps.theta_of_R(R);
  const double a = maps.curve().derivative(t);
  return {maps.curve().scaled(t) - t * a, t};
}

// ---------------------------------------------------------------------------
// CGFs

CgfSpec discrete_cgf(const std::vector<double>& values, const std::vector<double>& probs) {
  if (values.size() != probs.size()) throw LengthMismatch("values and probabilities differ in length");
  std::vector<double> lp(probs.size());
  double mean = 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (size_t i = 0; i < probs.size(); ++i) {
    lp[i] = probs[i] > 0.0 ? std::log(probs[i]) : kNegInf;
    mean += probs[i] * values[i];
    if (probs[i] > 0.0) {
      lo = std::min(lo, values[i]);
      hi = std::max(hi, values[i]);
    }
  }
  if (!(hi > lo)) throw DegenerateVariance("constant random variable");
  auto terms = [lp, values](double rho) {
    std::vector<double> t(lp.size());
    for (size_t i = 0; i < lp.size(); ++i) t[i] = lp[i] == kNegInf ? kNegInf : lp[i] + rho * values[i];
    return t;
  };
  CgfSpec spec;
  spec.mean = mean;
  spec.point = [terms](double rho) {
    CgfPoint p;
    p.phi = log_sum_exp(terms(rho));
    return p;
  };
  spec.dphi = [terms, values](double rho) {
    const auto t = terms(rho);
    const double z = log_sum_exp(t);
    double acc = 0.0;
    for (size_t i = 0; i < t.size(); ++i)
      if (t[i] != kNegInf) acc += std::exp(t[i] - z) * values[i];
    return acc;
  };
  return spec;
}

CgfSpec markov_cgf(const Matrix& kernel, const Matrix& g, const std::vector<double>& initial,
                   const std::vector<double>& g_initial) {
  const int k = kernel.rows();
  if (kernel.cols() != k || g.rows() != k || g.cols() != k) {
    throw LengthMismatch("kernel and generator shapes differ");
  }
  if (static_cast<int>(initial.size()) != k || static_cast<int>(g_initial.size()) != k) {
    throw LengthMismatch("initial terms do not match the kernel");
  }
  auto chain = std::make_shared<TiltedChain>();
  chain->log_kernel = Matrix(k, k);
  chain->g = Matrix(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const bool on = kernel(i, j) > 0.0;
      chain->log_kernel(i, j) = on ? std::log(kernel(i, j)) : kNegInf;
      chain->g(i, j) = on ? g(i, j) : 0.0;
    }
  for (int z = 0; z < k; ++z) {
    const bool on = initial[z] > 0.0;
    chain->log_initial.push_back(on ? std::log(initial[z]) : kNegInf);
    chain->g_initial.push_back(on ? g_initial[z] : 0.0);
  }
  // Stationary mean of g.
  const PerronResult st = perron(kernel, Normalization::kSumOne);
  double mean = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (kernel(i, j) > 0.0) mean += kernel(i, j) * st.right[j] * chain->g(i, j);

  CgfSpec spec;
  spec.mean = mean;
  spec.point = [chain](double rho) { return chain->point(rho); };
  spec.dphi = [chain](double rho) { return chain->dphi(rho); };
  return spec;
}

CgfSpec log_likelihood_cgf(const TransitionModel& model) {
  const int k = model.states();
  Matrix g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = model.kernel(i, j) > 0.0 ? -std::log(model.kernel(i, j)) : 0.0;
  std::vector<double> gi(k, 0.0);
  for (int z = 0; z < k; ++z) gi[z] = model.initial[z] > 0.0 ? -std::log(model.initial[z]) : 0.0;
  return markov_cgf(model.kernel, g, model.initial, gi);
}

CgfSpec profile_cgf(const RenyiProfile& profile) {
  auto prof = std::make_shared<RenyiProfile>(profile);
  CgfSpec spec;
  spec.mean = -prof->entropy_rate();
  spec.point = [prof](double rho) {
    const ProfilePoint pp = prof->evaluate(rho);
    CgfPoint p;
    p.phi = -pp.scaled;
    p.lower = -pp.corrections.upper;
    p.upper = -pp.corrections.lower;
    return p;
  };
  spec.dphi = [prof](double rho) { return -prof->derivative(rho); };
  spec.rho_min = kThetaMin;
  spec.rho_max = kThetaMax;
  return spec;
}

double rho_of_a(const CgfSpec& cgf, double a) {
  const double lo = cgf.dphi(cgf.rho_min), hi = cgf.dphi(cgf.rho_max);
  if (!(a > lo && a < hi)) {
    throw OutOfWindow("a = " + std::to_string(a) + " outside the CGF slope range (" + std::to_string(lo) +
                      ", " + std::to_string(hi) + ")");
  }
  return bisect_decreasing([&](double r) { return a - cgf.dphi(r); }, cgf.rho_min, cgf.rho_max);
}

// ---------------------------------------------------------------------------
// Tail converse

TailBound minimize_tail(const TailProblem& pr) {
  TailBound out;
  out.rho_a = pr.rho_a;
  const double d_max = pr.sign > 0 ? pr.rho_max - pr.rho_a : pr.rho_a - pr.rho_min;
  if (!(d_max > 0.0)) return out;
  const CgfPoint pa = pr.point(pr.rho_a);

  auto safe_point = [&](double rho, CgfPoint& p) {
    if (!(rho >= pr.rho_min && rho <= pr.rho_max)) return false;
    try {
      p = pr.point(rho);
    } catch (const Error&) {
      return false;
    }
    return std::isfinite(p.phi) && std::isfinite(p.lower) && std::isfinite(p.upper);
  };
  // Exponent of the complementary tail under the tilted law; must be < 0.
  auto exponent = [&](double d, const CgfPoint& p1) {
    const double shift = pr.sign * d * pr.a;
    return pr.bulk * (shift + pa.phi - p1.phi) + pr.edge * (shift + pa.upper - p1.lower);
  };
  auto value = [&](double s, const CgfPoint& p1, const CgfPoint& p2, double e) {
    const double v = pr.bulk * (p2.phi - (1.0 + s) * p1.phi) + pr.edge * (p2.upper - (1.0 + s) * p1.lower) -
                     (1.0 + s) * std::log(-std::expm1(e));
    return v / s;
  };
  std::function<double(double, double)> objective = [&](double s, double d) {
    const double rt = pr.rho_a + pr.sign * d;
    CgfPoint p1, p2;
    if (!(s > 0.0) || !safe_point(rt, p1)) return kPenalty;
    const double e = exponent(d, p1);
    if (!(e < 0.0) || !safe_point((1.0 + s) * rt, p2)) return kPenalty;
    const double v = value(s, p1, p2, e);
    return std::isfinite(v) ? v : kPenalty;
  };

  double best = kPenalty, best_s = 0.0, best_d = 0.0;
  const bool warm = pr.warm_s > 0.0 && pr.warm_d > 0.0 && objective(pr.warm_s, pr.warm_d) < kPenalty;
  if (warm) {
    best_s = pr.warm_s;
    best_d = pr.warm_d;
    best = objective(best_s, best_d);
  } else {
    constexpr int kS = 25, kD = 40;
    const double d_lo = std::log(1e-6), d_hi = std::log(d_max);
    // rho~ ascending: d ascending for the upper ray, descending for the lower one.
    std::vector<double> ds(kD);
    for (int j = 0; j < kD; ++j) {
      const int jj = pr.sign > 0 ? j : kD - 1 - j;
      ds[j] = std::exp(d_lo + (d_hi - d_lo) * jj / (kD - 1));
    }
    std::vector<CgfPoint> p1s(kD);
    std::vector<char> ok(kD);
    std::vector<double> es(kD);
    for (int j = 0; j < kD; ++j) {
      ok[j] = safe_point(pr.rho_a + pr.sign * ds[j], p1s[j]);
      if (ok[j]) {
        es[j] = exponent(ds[j], p1s[j]);
        ok[j] = es[j] < 0.0;
      }
    }
    for (int i = 0; i < kS; ++i) {
      const double s = std::pow(10.0, -3.0 + 4.0 * i / (kS - 1));
      for (int j = 0; j < kD; ++j) {
        if (!ok[j]) continue;
        CgfPoint p2;
        if (!safe_point((1.0 + s) * (pr.rho_a + pr.sign * ds[j]), p2)) continue;
        const double v = value(s, p1s[j], p2, es[j]);
        if (std::isfinite(v) && v < best) {
          best = v;
          best_s = s;
          best_d = ds[j];
        }
      }
    }
  }
  if (!(best < kPenalty)) return out;
  nelder_mead(objective, best_s, best_d, best);
  out.value = best;
  out.s_star = best_s;
  out.rho_star = pr.rho_a + pr.sign * best_d;
  out.feasible = true;
  return out;
}

namespace {

TailBound tail_converse(const CgfSpec& cgf, double a, double bulk, double edge, TailDirection direction) {
  const bool upper = direction == TailDirection::kUpper;
  if (upper ? !(a > cgf.mean) : !(a < cgf.mean)) {
    throw OutOfWindow("threshold " + std::to_string(a) + " is on the wrong side of the mean " +
                      std::to_string(cgf.mean));
  }
  TailProblem pr;
  pr.point = cgf.point;
  pr.a = a;
  pr.rho_a = rho_of_a(cgf, a);
  pr.bulk = bulk;
  pr.edge = edge;
  pr.sign = upper ? 1 : -1;
  pr.rho_min = cgf.rho_min;
  pr.rho_max = cgf.rho_max;
  TailBound b = minimize_tail(pr);
  if (!b.feasible) {
    throw NoFeasiblePoint("no admissible (s, rho~) for threshold " + std::to_string(a));
  }
  return b;
}

}  // namespace

TailBound one_shot_tail_converse(const CgfSpec& cgf, double a, TailDirection direction) {
  return tail_converse(cgf, a, 1.0, 0.0, direction);
}

TailBound markov_tail_converse(const CgfSpec& cgf, double a, int64_t n, TailDirection direction) {
  if (n < 2) throw std::invalid_argument("markov_tail_converse needs n >= 2");
  return tail_converse(cgf, a, static_cast<double>(n - 1), 1.0, direction);
}

}  // namespace markovrng
