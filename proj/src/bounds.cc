#include "markovrng/bounds.h"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>

#include "json.hpp"
#include "markovrng/errors.h"

namespace markovrng {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kLog2 = std::log(2.0);
const double kLog32 = std::log(1.5);

template <class E>
E lookup(const std::map<std::string, E>& table, const std::string& name, const char* what) {
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument(std::string("unknown ") + what + ": " + name);
  return it->second;
}

template <class E>
std::string reverse_lookup(const std::map<std::string, E>& table, E value) {
  for (const auto& [k, v] : table)
    if (v == value) return k;
  return "?";
}

const std::map<std::string, SingleShotKind>& kind_table() {
  static const std::map<std::string, SingleShotKind> t = {
      {"han", SingleShotKind::kHan},
      {"leftover_loose", SingleShotKind::kLeftoverLoose},
      {"exp_ach", SingleShotKind::kExpAch},
      {"sphere_conv", SingleShotKind::kSphereConv},
      {"han_conv", SingleShotKind::kHanConv},
      {"strong_conv", SingleShotKind::kStrongConv},
      {"strong_tail", SingleShotKind::kStrongTail},
      {"info_spectrum", SingleShotKind::kInfoSpectrum},
      {"exp_ach_multi", SingleShotKind::kExpAchMulti},
      {"sphere_conv_multi", SingleShotKind::kSphereConvMulti},
      {"strong_tail_multi", SingleShotKind::kStrongTailMulti},
  };
  return t;
}

const std::map<std::string, Theorem>& theorem_table() {
  static const std::map<std::string, Theorem> t = {
      {"ach", Theorem::kAch},         {"conv_sphere", Theorem::kConvSphere},
      {"conv_strong", Theorem::kConvStrong}, {"ach_a1", Theorem::kAchA1},
      {"ach_a2", Theorem::kAchA2},    {"conv_a1", Theorem::kConvA1},
      {"conv_a2", Theorem::kConvA2},
  };
  return t;
}

const std::map<std::string, Regime>& regime_table() {
  static const std::map<std::string, Regime> t = {
      {"ld_ach", Regime::kLdAch}, {"ld_conv", Regime::kLdConv}, {"ld_conv_sphere", Regime::kLdConvSphere},
      {"md", Regime::kMd},        {"second_order", Regime::kSecondOrder}, {"rer", Regime::kRer},
  };
  return t;
}

// Maximizes f over [lo, hi]: coarse grid, then Brent around the best cell.
std::pair<double, double> maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                                      int grid = 40) {
  double best_x = lo, best = f(lo);
  int best_i = 0;
  for (int i = 1; i <= grid; ++i) {
    const double x = lo + (hi - lo) * i / grid;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
      best_i = i;
    }
  }
  const double a = lo + (hi - lo) * std::max(0, best_i - 1) / grid;
  const double b = lo + (hi - lo) * std::min(grid, best_i + 1) / grid;
  boost::uintmax_t iters = 100;
  auto [x, nv] = boost::math::tools::brent_find_minima([&](double t) { return -f(t); }, a, b,
                                                       std::numeric_limits<double>::digits / 2, iters);
  if (-nv > best) return {x, -nv};
  return {best_x, best};
}

// Atoms (value z, probability) of a discrete random variable.
struct Atom {
  double z;
  double p;
};

// gamma candidates: 0, every atom, just above every atom, midpoints.
std::vector<double> gamma_grid(std::vector<Atom> atoms) {
  std::vector<double> zs;
  for (const auto& a : atoms) zs.push_back(a.z);
  std::sort(zs.begin(), zs.end());
  zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
  std::vector<double> g = {0.0};
  for (size_t i = 0; i < zs.size(); ++i) {
    g.push_back(zs[i]);
    g.push_back(zs[i] + 1e-9 * std::max(1.0, std::fabs(zs[i])));
    if (i + 1 < zs.size()) g.push_back(0.5 * (zs[i] + zs[i + 1]));
  }
  g.erase(std::remove_if(g.begin(), g.end(), [](double x) { return x < 0.0; }), g.end());
  std::sort(g.begin(), g.end());
  return g;
}

double mass_below(const std::vector<Atom>& atoms, double gamma, bool strict) {
  double s = 0.0;
  for (const auto& a : atoms)
    if (strict ? a.z < gamma : a.z <= gamma) s += a.p;
  return s;
}

std::vector<double> column_sums(const Matrix& pxy) {
  std::vector<double> py(pxy.cols(), 0.0);
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y) py[y] += pxy(x, y);
  return py;
}

Matrix as_column(const std::vector<double>& p) {
  Matrix m(static_cast<int>(p.size()), 1);
  for (size_t i = 0; i < p.size(); ++i) m(static_cast<int>(i), 0) = p[i];
  return m;
}

// Atoms of -log P(x, y) over the whole joint alphabet.
std::vector<Atom> self_information(const Matrix& pxy) {
  std::vector<Atom> atoms;
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y)
      if (pxy(x, y) > 0.0) atoms.push_back({-std::log(pxy(x, y)), pxy(x, y)});
  return atoms;
}

// Atoms of log(Q(y) / P(x, y)).
std::vector<Atom> relative_information(const Matrix& pxy, const std::vector<double>& q) {
  std::vector<Atom> atoms;
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y)
      if (pxy(x, y) > 0.0) atoms.push_back({std::log(q[y] / pxy(x, y)), pxy(x, y)});
  return atoms;
}

SingleShotResult infimum_over_gamma(const std::vector<Atom>& atoms,
                                    const std::function<double(double)>& penalty) {
  SingleShotResult r;
  r.value = std::numeric_limits<double>::infinity();
  for (double g : gamma_grid(atoms)) {
    const double v = mass_below(atoms, g, true) + penalty(g);
    if (v < r.value) {
      r.value = v;
      r.gamma_star = g;
    }
  }
  r.clamped = r.value >= 1.0;
  return r;
}

SingleShotResult supremum_over_gamma(const std::vector<Atom>& atoms, const std::function<double(double, double)>& f) {
  SingleShotResult r;
  r.value = 0.0;
  bool found = false;
  for (double g : gamma_grid(atoms)) {
    const double v = f(mass_below(atoms, g, true), g);
    if (v > r.value) {
      r.value = v;
      r.gamma_star = g;
      found = true;
    }
  }
  if (!found) throw Infeasible("no gamma gives a positive converse value");
  return r;
}

SingleShotResult exponential_achievability(const ThetaCurve& curve, double M) {
  const double lm = std::log(M);
  auto neg_log = [&](double t) { return -(t * lm - curve.scaled(t)) / (1.0 + t); };
  auto [t, v] = maximize_1d(neg_log, 0.0, 1.0);
  SingleShotResult r;
  r.theta_star = t;
  r.value = 1.5 * std::exp(-v);
  r.clamped = r.value >= 1.0;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

double StdNormal::cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double StdNormal::quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

std::string single_shot_kind_name(SingleShotKind kind) { return reverse_lookup(kind_table(), kind); }
SingleShotKind parse_single_shot_kind(const std::string& name) { return lookup(kind_table(), name, "bound kind"); }

bool is_converse(SingleShotKind kind) {
  switch (kind) {
    case SingleShotKind::kSphereConv:
    case SingleShotKind::kHanConv:
    case SingleShotKind::kStrongConv:
    case SingleShotKind::kStrongTail:
    case SingleShotKind::kSphereConvMulti:
    case SingleShotKind::kStrongTailMulti:
      return true;
    default:
      return false;
  }
}

SingleShotResult single_shot_bound(const std::vector<double>& p, double M, SingleShotKind kind,
                                   const SingleShotOptions& options) {
  return single_shot_bound(as_column(p), M, kind, options);
}

SingleShotResult single_shot_bound(const Matrix& pxy, double M, SingleShotKind kind,
                                   const SingleShotOptions& options) {
  if (!(M >= 2.0)) throw std::invalid_argument("single-shot bounds need M >= 2");
  const double lm = std::log(M);
  const double nu = options.nu;
  if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("nu must lie in (0, 1)");

  switch (kind) {
    case SingleShotKind::kHan:
      return infimum_over_gamma(self_information(pxy), [&](double g) { return std::exp(lm - g); });
    case SingleShotKind::kLeftoverLoose:
      return infimum_over_gamma(self_information(pxy), [&](double g) { return 0.5 * std::exp(0.5 * (lm - g)); });
    case SingleShotKind::kExpAch: {
      std::vector<double> flat;
      for (int x = 0; x < pxy.rows(); ++x)
        for (int y = 0; y < pxy.cols(); ++y) flat.push_back(pxy(x, y));
      return exponential_achievability(DistributionCurve(flat), M);
    }
    case SingleShotKind::kSphereConv:
      return supremum_over_gamma(self_information(pxy),
                                 [&](double mass, double g) { return mass * (1.0 - std::exp(g - lm)); });
    case SingleShotKind::kHanConv:
      return supremum_over_gamma(self_information(pxy),
                                 [&](double mass, double g) { return mass - std::exp(g - lm); });
    case SingleShotKind::kStrongConv: {
      std::vector<double> masses;
      for (int x = 0; x < pxy.rows(); ++x)
        for (int y = 0; y < pxy.cols(); ++y)
          if (pxy(x, y) > 0.0) masses.push_back(pxy(x, y));
      std::sort(masses.begin(), masses.end(), std::greater<double>());
      SingleShotResult r;
      double prefix = 0.0;
      for (size_t k = 1; k <= masses.size() && static_cast<double>(k) < M; ++k) {
        prefix += masses[k - 1];
        const double f = 1.0 - static_cast<double>(k) / M;
        const double v = f * f * prefix;
        if (v > r.value) {
          r.value = v;
          r.gamma_star = std::log(static_cast<double>(k));  // log |Omega|
        }
      }
      if (!(r.value > 0.0)) throw Infeasible("no subset with |Omega| < M");
      return r;
    }
    case SingleShotKind::kStrongTail: {
      std::vector<double> flat;
      for (int x = 0; x < pxy.rows(); ++x)
        for (int y = 0; y < pxy.cols(); ++y) flat.push_back(pxy(x, y));
      DistributionCurve curve(flat);
      InverseMaps maps(curve);
      const double t = maps.theta_of_R(std::log(M * nu));
      const double a = curve.derivative(t);
      SingleShotResult r;
      r.theta_star = t;
      r.gamma_star = a;
      r.value = (1.0 - nu) * (1.0 - nu) * mass_below(self_information(pxy), a, false);
      return r;
    }
    case SingleShotKind::kInfoSpectrum: {
      const auto q = options.q_y.empty() ? column_sums(pxy) : options.q_y;
      if (static_cast<int>(q.size()) != pxy.cols()) throw LengthMismatch("Q_Y length differs from the Y alphabet");
      const auto py = column_sums(pxy);
      for (size_t y = 0; y < q.size(); ++y)
        if (py[y] > 0.0 && !(q[y] > 0.0)) throw SupportViolation("supp(P_Y) is not in supp(Q_Y)", static_cast<int>(y));
      return infimum_over_gamma(relative_information(pxy, q),
                                [&](double g) { return 0.5 * std::exp(0.5 * (lm - g)); });
    }
    case SingleShotKind::kExpAchMulti:
      return exponential_achievability(DistributionCurve(pxy, CondVariant::kUpper), M);
    case SingleShotKind::kSphereConvMulti:
      return supremum_over_gamma(relative_information(pxy, column_sums(pxy)),
                                 [&](double mass, double g) { return mass * (1.0 - std::exp(g - lm)); });
    case SingleShotKind::kStrongTailMulti: {
      DistributionCurve curve(pxy, CondVariant::kUpper);
      InverseMaps maps(curve);
      const double t = maps.theta_of_R(std::log(M * nu));
      const double a = curve.derivative(t);
      const auto q = optimal_conditioning(pxy, t);
      SingleShotResult r;
      r.theta_star = t;
      r.gamma_star = a;
      r.value = (1.0 - nu) * (1.0 - nu) * mass_below(relative_information(pxy, q), a, false);
      return r;
    }
  }
  throw std::invalid_argument("unhandled bound kind");
}

// ---------------------------------------------------------------------------

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::kNegLogDeltaBarLower: return "neg_log_delta_bar_lower";
    case Quantity::kNegLogDeltaUpper: return "neg_log_delta_upper";
    case Quantity::kNegLogDeltaBarUpper: return "neg_log_delta_bar_upper";
    case Quantity::kRerUpper: return "rer_upper";
    case Quantity::kRerLower: return "rer_lower";
    case Quantity::kMmirUpper: return "mmir_upper";
    case Quantity::kMmirLower: return "mmir_lower";
  }
  return "?";
}

std::string theorem_name(Theorem t) { return reverse_lookup(theorem_table(), t); }
Theorem parse_theorem(const std::string& name) { return lookup(theorem_table(), name, "theorem"); }
std::string regime_name(Regime r) { return reverse_lookup(regime_table(), r); }
Regime parse_regime(const std::string& name) { return lookup(regime_table(), name, "regime"); }

BoundQuery BoundQuery::from_rate(int64_t n, double rate) {
  BoundQuery q;
  q.n = n;
  q.log_m = static_cast<double>(n) * rate;
  return q;
}

std::string report_to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
  j["theorem"] = r.theorem;
  j["quantity"] = quantity_name(r.quantity);
  j["value"] = r.value ? num(*r.value) : nlohmann::ordered_json(nullptr);
  j["theta_star"] = num(r.theta_star);
  j["s_star"] = num(r.s_star);
  j["theta_tilde_star"] = num(r.theta_tilde_star);
  j["feasible"] = r.feasible;
  j["clamped"] = r.clamped;
  j["n"] = r.n;
  j["rate"] = num(r.rate);
  j["epsilon"] = num(r.epsilon);
  return j.dump(2);
}

namespace {

bool is_surng(Theorem t) {
  return t == Theorem::kAchA1 || t == Theorem::kAchA2 || t == Theorem::kConvA1 || t == Theorem::kConvA2;
}

Variant profile_variant(Theorem t) {
  switch (t) {
    case Theorem::kAchA1:
    case Theorem::kConvA1:
      return Variant::kLower;
    case Theorem::kAchA2:
    case Theorem::kConvA2:
      return Variant::kUpper;
    default:
      return Variant::kSingle;
  }
}

BoundReport blank_report(Theorem theorem, const BoundQuery& q, Quantity quantity) {
  if (q.n < 2) throw std::invalid_argument("block length must be at least 2");
  BoundReport r;
  r.theorem = theorem_name(theorem);
  r.quantity = quantity;
  r.n = q.n;
  r.rate = q.log_m / static_cast<double>(q.n);
  r.epsilon = q.epsilon;
  return r;
}

// sup over [0,1] of [-theta log M + (n-1) theta H_{1+theta} + delta_lower(theta)]/(1+theta)
// (delta form) or of [-theta log M + (n-1) theta H]/(1+theta) + xi_lower(theta) (xi form).
BoundReport achievability(const RenyiProfile& prof, Theorem theorem, const BoundQuery& q) {
  BoundReport r = blank_report(theorem, q, Quantity::kNegLogDeltaBarLower);
  const double n1 = static_cast<double>(q.n - 1);
  const bool xi_form = prof.variant() == Variant::kUpper;
  auto f = [&](double t) {
    const ProfilePoint pp = prof.evaluate(t);
    const double bulk = -t * q.log_m + n1 * pp.scaled;
    return xi_form ? bulk / (1.0 + t) + pp.corrections.lower : (bulk + pp.corrections.lower) / (1.0 + t);
  };
  auto [t, v] = maximize_1d(f, 0.0, 1.0);
  r.theta_star = t;
  r.value = v - kLog32;
  r.clamped = *r.value <= 0.0;
  return r;
}

void fill_tail(BoundReport& r, const TailBound& tb, double constant) {
  r.feasible = tb.feasible;
  if (!tb.feasible) {
    r.value.reset();
    return;
  }
  r.value = tb.value + constant;
  r.s_star = tb.s_star;
  r.theta_tilde_star = tb.rho_star;
  r.clamped = *r.value <= 0.0;
}

TailProblem renyi_tail(const CgfSpec& cgf, double a_z, double rho_a, int64_t n) {
  TailProblem pr;
  pr.point = cgf.point;
  pr.a = a_z;
  pr.rho_a = rho_a;
  pr.bulk = static_cast<double>(n - 1);
  pr.edge = 1.0;
  pr.sign = 1;
  pr.rho_min = cgf.rho_min;
  pr.rho_max = cgf.rho_max;
  return pr;
}

struct WarmStart {
  double s = 0.0;
  double d = 0.0;
};

// Sphere-packing converse at per-symbol threshold R = (1/n) log(M/2).
BoundReport sphere_converse(const RenyiProfile& prof, const InverseMaps& maps, Theorem theorem, const BoundQuery& q,
                            WarmStart* warm) {
  BoundReport r = blank_report(theorem, q, Quantity::kNegLogDeltaUpper);
  const double R = (q.log_m - kLog2) / static_cast<double>(q.n);
  if (!(R > maps.a_lower() && R < maps.entropy())) {
    throw OutOfWindow("R = " + std::to_string(R) + " outside (" + std::to_string(maps.a_lower()) + ", " +
                      std::to_string(maps.entropy()) + ")");
  }
  const double t = maps.theta_of_a(R);
  r.theta_star = t;
  TailProblem pr = renyi_tail(profile_cgf(prof), -R, t, q.n);
  if (warm) {
    pr.warm_s = warm->s;
    pr.warm_d = warm->d;
  }
  const TailBound tb = minimize_tail(pr);
  fill_tail(r, tb, kLog2);
  if (warm && tb.feasible) *warm = {tb.s_star, tb.rho_star - t};
  return r;
}

// theta(a(R)) solving the R-defining equation of the strong converses:
//   (n-1) R + (1+t) a - delta_lower(t) = log(M/2)               (delta form)
//   (n-1) R + (1+t) (a - xi_lower(t)) = log(M/2)                (xi form)
double strong_log_m(const RenyiProfile& prof, const InverseMaps& maps, double t, int64_t n) {
  const double a = prof.derivative(t);
  const double R = maps.R_of_theta(t);
  const double lower = prof.corrections(t).lower;
  const double n1 = static_cast<double>(n - 1);
  if (prof.variant() == Variant::kUpper) return n1 * R + (1.0 + t) * (a - lower) + kLog2;
  return n1 * R + (1.0 + t) * a - lower + kLog2;
}

constexpr double kStrongThetaMin = 1e-9;

double solve_strong_theta(const RenyiProfile& prof, const InverseMaps& maps, const BoundQuery& q) {
  auto g = [&](double t) { return strong_log_m(prof, maps, t, q.n) - q.log_m; };
  const double g_lo = g(kStrongThetaMin), g_hi = g(kThetaMax);
  if (!(g_lo > 0.0 && g_hi < 0.0)) {
    throw OutOfWindow("log M = " + std::to_string(q.log_m) + " leaves R outside (R(a_lower), H)");
  }
  boost::math::tools::eps_tolerance<double> tol(48);
  boost::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::bisect([&](double t) { return -g(t); }, kStrongThetaMin, kThetaMax, tol, iters);
  return 0.5 * (a + b);
}

BoundReport strong_converse_at(const RenyiProfile& prof, Theorem theorem,
                               const BoundQuery& q, double t, WarmStart* warm) {
  BoundReport r = blank_report(theorem, q, Quantity::kNegLogDeltaBarUpper);
  r.theta_star = t;
  const double a = prof.derivative(t);
  CgfSpec cgf;
  if (prof.variant() == Variant::kUpper) {
    cgf = profile_cgf(RenyiProfile(prof.model(), Variant::kTwoParam, t));
  } else {
    cgf = profile_cgf(prof);
  }
  TailProblem pr = renyi_tail(cgf, -a, t, q.n);
  if (warm) {
    pr.warm_s = warm->s;
    pr.warm_d = warm->d;
  }
  const TailBound tb = minimize_tail(pr);
  fill_tail(r, tb, 2.0 * kLog2);
  if (warm && tb.feasible) *warm = {tb.s_star, tb.rho_star - t};
  return r;
}

void require_single_terminal(const TransitionModel& model) {
  if (!model.single_terminal()) {
    throw std::invalid_argument("URNG bounds need a single-terminal model (y_size = 1)");
  }
}

BoundReport markov_bound_impl(const TransitionModel& model, Theorem theorem, const BoundQuery& q) {
  const RenyiProfile prof(model, profile_variant(theorem));
  switch (theorem) {
    case Theorem::kAch:
    case Theorem::kAchA1:
    case Theorem::kAchA2:
      return achievability(prof, theorem, q);
    case Theorem::kConvSphere:
    case Theorem::kConvA1: {
      const InverseMaps maps(prof);
      return sphere_converse(prof, maps, theorem, q, nullptr);
    }
    case Theorem::kConvStrong:
    case Theorem::kConvA2: {
      const InverseMaps maps(prof);
      return strong_converse_at(prof, theorem, q, solve_strong_theta(prof, maps, q), nullptr);
    }
  }
  throw std::invalid_argument("unhandled theorem");
}

}  // namespace

BoundReport urng_markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query) {
  require_single_terminal(model);
  if (is_surng(theorem)) throw std::invalid_argument("not a URNG theorem: " + theorem_name(theorem));
  return markov_bound_impl(model, theorem, query);
}

BoundReport surng_markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query) {
  if (!is_surng(theorem)) throw std::invalid_argument("not a SURNG theorem: " + theorem_name(theorem));
  require_assumption(model, profile_variant(theorem) == Variant::kLower ? Assumption::kA1 : Assumption::kA2);
  return markov_bound_impl(model, theorem, query);
}

BoundReport markov_bound(const TransitionModel& model, Theorem theorem, const BoundQuery& query) {
  return is_surng(theorem) ? surng_markov_bound(model, theorem, query) : urng_markov_bound(model, theorem, query);
}

// ---------------------------------------------------------------------------
// RER / MMIR

namespace {

constexpr double kRerThetaMin = 1e-4;
constexpr double kRerThetaMax = 1.0;
// Lower bounds evaluate H_{1-theta}; theta = 1 would need the order-0 limit.
constexpr double kRerLowerThetaMax = 1.0 - 1e-4;

BoundReport divergence_bound(const TransitionModel& model, Variant variant, int64_t n, double R,
                             RateDirection direction, std::optional<double> theta, bool mmir) {
  if (n < 2) throw std::invalid_argument("block length must be at least 2");
  const RenyiProfile prof(model, variant);
  const double nn = static_cast<double>(n);
  BoundReport r;
  r.theorem = mmir ? (direction == RateDirection::kUpper ? "mmir_upper" : "mmir_lower")
                   : (direction == RateDirection::kUpper ? "rer_upper" : "rer_lower");
  r.n = n;
  r.rate = R;
  if (direction == RateDirection::kUpper) {
    r.quantity = mmir ? Quantity::kMmirUpper : Quantity::kRerUpper;
    // R - (n-1)/n H_{1+t} + (log 2 - delta_lower(t)) / (t n), needs R >= H_{1+t}.
    auto f = [&](double t) {
      const ProfilePoint pp = prof.evaluate(t);
      const double h = pp.scaled / t;
      if (R < h) return std::numeric_limits<double>::infinity();
      return R - (nn - 1.0) / nn * h + (kLog2 - pp.corrections.lower) / (t * nn);
    };
    if (theta) {
      if (!(*theta > 0.0 && *theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
      const double v = f(*theta);
      if (!std::isfinite(v)) throw OutOfWindow("R is below H_{1+theta} for the chosen theta");
      r.value = v;
      r.theta_star = *theta;
    } else {
      // Log-spaced scan of (0, 1], then Brent on the best cell.
      constexpr int kGrid = 120;
      double best = std::numeric_limits<double>::infinity(), bt = kNaN;
      int bi = -1;
      auto at = [&](int i) { return kRerThetaMin * std::pow(kRerThetaMax / kRerThetaMin, double(i) / kGrid); };
      for (int i = 0; i <= kGrid; ++i) {
        const double v = f(at(i));
        if (v < best) {
          best = v;
          bt = at(i);
          bi = i;
        }
      }
      if (bi < 0) throw OutOfWindow("R is below H_{1+theta} for every theta in (0, 1]");
      boost::uintmax_t iters = 100;
      auto [t, v] = boost::math::tools::brent_find_minima(f, at(std::max(0, bi - 1)), at(std::min(kGrid, bi + 1)),
                                                          std::numeric_limits<double>::digits / 2, iters);
      if (v < best) {
        best = v;
        bt = t;
      }
      r.value = best;
      r.theta_star = bt;
    }
    r.clamped = false;
  } else {
    r.quantity = mmir ? Quantity::kMmirLower : Quantity::kRerLower;
    // R - (n-1)/n H_{1-t} + delta_lower(-t) / (t n)
    auto f = [&](double t) {
      const ProfilePoint pp = prof.evaluate(-t);
      const double h = pp.scaled / (-t);
      return R - (nn - 1.0) / nn * h + pp.corrections.lower / (t * nn);
    };
    if (theta) {
      if (!(*theta > 0.0 && *theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
      const double t = std::min(*theta, kRerLowerThetaMax);
      r.value = f(t);
      r.theta_star = t;
    } else {
      auto [t, v] = maximize_1d(f, kRerThetaMin, kRerLowerThetaMax, 120);
      r.value = v;
      r.theta_star = t;
    }
    r.clamped = *r.value <= 0.0;
  }
  return r;
}

}  // namespace

BoundReport urng_rer_bound(const TransitionModel& model, int64_t n, double R, RateDirection direction,
                           std::optional<double> theta) {
  require_single_terminal(model);
  return divergence_bound(model, Variant::kSingle, n, R, direction, theta, false);
}

BoundReport surng_mmir_bound(const TransitionModel& model, int64_t n, double R, RateDirection direction,
                             std::optional<double> theta) {
  require_assumption(model, Assumption::kA1);
  return divergence_bound(model, Variant::kLower, n, R, direction, theta, true);
}

// ---------------------------------------------------------------------------
// Asymptotics

AsymptoticResult asymptotic(const TransitionModel& model, Regime regime, const AsymptoticParams& p) {
  const Variant variant = p.source == Source::kPlain      ? Variant::kSingle
                          : p.source == Source::kLowerCond ? Variant::kLower
                                                           : Variant::kUpper;
  const RenyiProfile prof(model, variant);
  AsymptoticResult out;
  switch (regime) {
    case Regime::kLdAch: {
      const auto lr = legendre_sup(prof, p.R, true);
      out.value = lr.exponent;
      out.theta_star = lr.theta_star;
      const InverseMaps maps(prof);
      out.critical_rate = maps.critical_rate();
      out.matches_above_critical = p.R >= out.critical_rate;
      return out;
    }
    case Regime::kLdConv: {
      const InverseMaps maps(prof);
      if (!(p.R > maps.R_lower() && p.R < maps.entropy())) {
        throw OutOfWindow("R outside (R(a_lower), H) for the large-deviation converse");
      }
      const auto lr = legendre_closed_form(maps, p.R);
      out.value = lr.exponent;
      out.theta_star = lr.theta_star;
      out.critical_rate = maps.critical_rate();
      out.matches_above_critical = p.R >= out.critical_rate;
      return out;
    }
    case Regime::kLdConvSphere: {
      const InverseMaps maps(prof);
      if (!(p.R > maps.a_lower() && p.R < maps.entropy())) {
        throw OutOfWindow("R outside (a_lower, H) for the sphere-packing exponent");
      }
      const double t = maps.theta_of_a(p.R);
      out.value = prof.scaled(t) - t * p.R;
      out.theta_star = t;
      out.critical_rate = maps.critical_rate();
      return out;
    }
    case Regime::kMd: {
      const double v = prof.variance();
      if (!(v > kMinVariance)) throw DegenerateVariance("zero variance");
      out.value = p.delta * p.delta / (2.0 * v);
      return out;
    }
    case Regime::kSecondOrder: {
      const double v = prof.variance();
      if (!(v > kMinVariance)) throw DegenerateVariance("zero variance");
      const double nn = static_cast<double>(p.n);
      out.value = nn * prof.entropy_rate() + std::sqrt(nn * v) * StdNormal::quantile(p.epsilon);
      return out;
    }
    case Regime::kRer:
      out.value = std::max(0.0, p.R - prof.entropy_rate());
      return out;
  }
  throw std::invalid_argument("unhandled regime");
}

// ---------------------------------------------------------------------------
// Rate for epsilon

RatePoint rate_for_epsilon(const TransitionModel& model, int64_t n, double epsilon, Theorem theorem) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (is_surng(theorem)) {
    if (profile_variant(theorem) == Variant::kLower) require_assumption(model, Assumption::kA1);
    else require_assumption(model, Assumption::kA2);
  } else {
    require_single_terminal(model);
  }
  const double target = -std::log(epsilon);
  const double nn = static_cast<double>(n);
  const RenyiProfile prof(model, profile_variant(theorem));

  // Each family is searched over its natural parameter x, with the bound
  // value decreasing in the reported rate.
  std::function<BoundReport(double)> eval;
  double lo = 0.0, hi = 0.0;
  bool increasing = false;  // bound value as a function of x
  std::unique_ptr<InverseMaps> maps;
  WarmStart warm;

  switch (theorem) {
    case Theorem::kAch:
    case Theorem::kAchA1:
    case Theorem::kAchA2: {
      const double h = prof.entropy_rate();
      lo = 1e-9;
      hi = h;
      eval = [&, theorem](double R) { return achievability(prof, theorem, BoundQuery::from_rate(n, R)); };
      break;
    }
    case Theorem::kConvSphere:
    case Theorem::kConvA1: {
      maps = std::make_unique<InverseMaps>(prof);
      lo = maps->a_lower() + 1e-9;
      hi = maps->entropy() - 1e-9;
      eval = [&, theorem](double R) {
        BoundQuery q;
        q.n = n;
        q.log_m = nn * R + kLog2;
        return sphere_converse(prof, *maps, theorem, q, &warm);
      };
      break;
    }
    case Theorem::kConvStrong:
    case Theorem::kConvA2: {
      maps = std::make_unique<InverseMaps>(prof);
      lo = kStrongThetaMin;
      hi = kThetaMax;
      increasing = true;
      eval = [&, theorem](double t) {
        BoundQuery q;
        q.n = n;
        q.log_m = strong_log_m(prof, *maps, t, n);
        return strong_converse_at(prof, theorem, q, t, &warm);
      };
      break;
    }
  }

  auto gap = [&](double x) {
    const BoundReport r = eval(x);
    if (!r.feasible) return std::numeric_limits<double>::quiet_NaN();
    return *r.value - target;
  };
  // Orient so that g(lo) > 0 > g(hi).
  double a = increasing ? hi : lo, b = increasing ? lo : hi;
  double ga = gap(a);
  // At the far end theta(R) reaches the edge of the tilt domain and the tail
  // search has no room; move inward until it is feasible.
  for (int i = 0; i < 60 && std::isnan(ga); ++i) {
    a = a + 0.25 * (b - a);
    ga = gap(a);
  }
  if (!(ga >= 0.0)) throw OutOfWindow("epsilon unreachable within the bound's window");
  double gb = gap(b);
  if (!(gb <= 0.0)) {
    // Near the upper edge the tail search can lose feasibility; step inward.
    double x = b;
    for (int i = 0; i < 60 && !(gb <= 0.0); ++i) {
      x = 0.5 * (x + a);
      gb = gap(x);
    }
    if (!(gb <= 0.0)) throw OutOfWindow("bound never drops to the target inside the window");
    b = x;
  }
  // Bisection on the parameter; rates are reported with |dR| <= 1e-7.
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    double gm = gap(m);
    if (std::isnan(gm)) gm = -1.0;  // infeasible tail: treat as below target
    if (gm >= 0.0) a = m;
    else b = m;
    if (std::fabs(b - a) <= 1e-8 * std::max(1.0, std::fabs(a))) break;
  }
  RatePoint out;
  out.report = eval(a);
  out.report.epsilon = epsilon;
  out.rate = out.report.rate;
  return out;
}

}  // namespace markovrng
