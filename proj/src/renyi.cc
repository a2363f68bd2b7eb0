#include "markovrng/renyi.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace markovrng {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

// log sum exp over finite entries; -inf when all entries are -inf.
double log_sum_exp(const std::vector<double>& v) {
  double top = kNegInf;
  for (double e : v) top = std::max(top, e);
  if (top == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double e : v)
    if (e != kNegInf) acc += std::exp(e - top);
  return top + std::log(acc);
}

// (1 + theta) * log p with 0^{1+theta} = 0.
double tilt(double log_p, double theta) { return log_p == kNegInf ? kNegInf : (1.0 + theta) * log_p; }

std::vector<double> column_sums(const Matrix& pxy) {
  std::vector<double> py(pxy.cols(), 0.0);
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y) py[y] += pxy(x, y);
  return py;
}

// log sum_x P(x,y)^{1+theta} for every y.
std::vector<double> log_column_power(const Matrix& pxy, double theta) {
  std::vector<double> out(pxy.cols());
  std::vector<double> terms(pxy.rows());
  for (int y = 0; y < pxy.cols(); ++y) {
    for (int x = 0; x < pxy.rows(); ++x) terms[x] = tilt(safe_log(pxy(x, y)), theta);
    out[y] = log_sum_exp(terms);
  }
  return out;
}

Matrix as_column(const std::vector<double>& p) {
  Matrix m(static_cast<int>(p.size()), 1);
  for (size_t i = 0; i < p.size(); ++i) m(static_cast<int>(i), 0) = p[i];
  return m;
}

// Scaled version of a log-domain matrix: exp(L - max L), plus max L.
std::pair<Matrix, double> exp_scaled(const Matrix& log_m) {
  double top = kNegInf;
  for (int i = 0; i < log_m.rows(); ++i)
    for (int j = 0; j < log_m.cols(); ++j) top = std::max(top, log_m(i, j));
  if (top == kNegInf) throw ConvergenceFailure("tilted matrix vanishes");
  Matrix out(log_m.rows(), log_m.cols());
  for (int i = 0; i < log_m.rows(); ++i)
    for (int j = 0; j < log_m.cols(); ++j)
      out(i, j) = log_m(i, j) == kNegInf ? 0.0 : std::exp(log_m(i, j) - top);
  return {out, top};
}

double lower_scaled(const Matrix& pxy, double theta) {
  const auto py = column_sums(pxy);
  std::vector<double> terms;
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y) {
      const double lp = safe_log(pxy(x, y));
      terms.push_back(lp == kNegInf ? kNegInf : tilt(lp, theta) - theta * std::log(py[y]));
    }
  return -log_sum_exp(terms);
}

double upper_scaled(const Matrix& pxy, double theta) {
  const auto lc = log_column_power(pxy, theta);
  std::vector<double> terms(lc.size());
  for (size_t y = 0; y < lc.size(); ++y) terms[y] = lc[y] == kNegInf ? kNegInf : lc[y] / (1.0 + theta);
  return -(1.0 + theta) * log_sum_exp(terms);
}

// Simple-cycle and simple-path searches on the support graph of a weighted
// digraph given by log weights lw(to, from).
struct CycleSearch {
  const Matrix& lw;
  int k;
  double best_mean = kNegInf;
  std::vector<int> best_cycle;
  std::vector<int> path;
  std::vector<char> on_path;

  void cycles_from(int start, int u, double acc) {
    for (int v = 0; v < k; ++v) {
      const double w = lw(v, u);
      if (w == kNegInf) continue;
      if (v == start) {
        const double mean = (acc + w) / static_cast<double>(path.size());
        if (mean > best_mean) {
          best_mean = mean;
          best_cycle = path;
        }
      } else if (v > start && !on_path[v]) {
        on_path[v] = 1;
        path.push_back(v);
        cycles_from(start, v, acc + w);
        path.pop_back();
        on_path[v] = 0;
      }
    }
  }

  void paths_from(int u, double acc, std::vector<double>& best) {
    for (int v = 0; v < k; ++v) {
      const double w = lw(v, u);
      if (w == kNegInf || on_path[v]) continue;
      best[v] = std::max(best[v], acc + w);
      on_path[v] = 1;
      paths_from(v, acc + w, best);
      on_path[v] = 0;
    }
  }
};

MinEntropyCertificate cycle_certificate(const Matrix& lw) {
  const int k = lw.rows();
  CycleSearch cs{lw, k, kNegInf, {}, {}, std::vector<char>(k, 0)};
  for (int s = 0; s < k; ++s) {
    cs.path = {s};
    cs.on_path.assign(k, 0);
    cs.on_path[s] = 1;
    cs.cycles_from(s, s, 0.0);
  }
  MinEntropyCertificate cert;
  cert.rate = -cs.best_mean;
  cert.best_cycle = cs.best_cycle;
  cert.cycle_length = static_cast<int>(cs.best_cycle.size());
  double log_a = 0.0;
  if (k > 1) {
    log_a = std::numeric_limits<double>::infinity();
    for (int a = 0; a < k; ++a) {
      std::vector<double> best(k, kNegInf);
      cs.on_path.assign(k, 0);
      cs.on_path[a] = 1;
      cs.paths_from(a, 0.0, best);
      for (int b = 0; b < k; ++b)
        if (b != a) log_a = std::min(log_a, best[b]);
    }
  }
  cert.path_constant = std::exp(log_a);
  return cert;
}

}  // namespace

// ---------------------------------------------------------------------------
// Single-shot measures

double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

double renyi_entropy(const std::vector<double>& p, double theta) {
  if (std::isinf(theta) && theta > 0) return min_entropy(p);
  if (std::fabs(theta) < kThetaZero) return shannon_entropy(p);
  std::vector<double> terms(p.size());
  for (size_t i = 0; i < p.size(); ++i) terms[i] = tilt(safe_log(p[i]), theta);
  return -log_sum_exp(terms) / theta;
}

double min_entropy(const std::vector<double>& p) {
  return -std::log(*std::max_element(p.begin(), p.end()));
}

double smooth_min_entropy(const std::vector<double>& p, double eps) {
  std::vector<double> q(p);
  std::sort(q.begin(), q.end(), std::greater<double>());
  // Trimming mass t from the top costs t/2 in variational distance, so the
  // budget is 2 eps; the optimal sub-normalized P' caps all masses at a level c.
  const double budget = 2.0 * eps;
  double prefix = 0.0;
  for (size_t k = 0; k < q.size(); ++k) {
    prefix += q[k];
    const double c = (prefix - budget) / static_cast<double>(k + 1);
    const double next = k + 1 < q.size() ? q[k + 1] : 0.0;
    if (c >= next) return c > 0.0 ? -std::log(c) : kInfinity;
  }
  return kInfinity;
}

double cond_shannon(const Matrix& pxy) {
  const auto py = column_sums(pxy);
  double h = 0.0;
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y) {
      const double v = pxy(x, y);
      if (v > 0.0) h -= v * std::log(v / py[y]);
    }
  return h;
}

double cond_renyi(const Matrix& pxy, double theta, CondVariant variant, double theta_prime) {
  if (variant == CondVariant::kTwoParam) {
    // (theta'/(1+theta')) H^up_{1+theta'} = -log sum_y [sum_x P^{1+theta'}]^{1/(1+theta')}
    const auto lb = log_column_power(pxy, theta_prime);
    std::vector<double> t(lb.size());
    for (size_t y = 0; y < lb.size(); ++y) t[y] = lb[y] == kNegInf ? kNegInf : lb[y] / (1.0 + theta_prime);
    const double shift = -log_sum_exp(t);
    if (std::fabs(theta) < kThetaZero) {
      // -d/dtheta log sum_y A_theta(y) B(y)^{-theta c'} at 0, c' = 1/(1+theta')
      double d = 0.0;
      for (int y = 0; y < pxy.cols(); ++y) {
        double py = 0.0;
        for (int x = 0; x < pxy.rows(); ++x) {
          const double v = pxy(x, y);
          if (v > 0.0) d -= v * std::log(v);
          py += v;
        }
        if (py > 0.0) d += py * lb[y] / (1.0 + theta_prime);
      }
      return d + shift;
    }
    const auto la = log_column_power(pxy, theta);
    std::vector<double> terms(la.size());
    for (size_t y = 0; y < la.size(); ++y)
      terms[y] = la[y] == kNegInf ? kNegInf : la[y] - theta / (1.0 + theta_prime) * lb[y];
    return -log_sum_exp(terms) / theta + shift;
  }
  if (std::fabs(theta) < kThetaZero) return cond_shannon(pxy);
  if (variant == CondVariant::kLower) return lower_scaled(pxy, theta) / theta;
  return upper_scaled(pxy, theta) / theta;
}

double relative_cond_renyi(const Matrix& pxy, const std::vector<double>& qy, double theta) {
  const auto py = column_sums(pxy);
  if (qy.size() != py.size()) throw LengthMismatch("Q_Y length differs from the Y alphabet");
  for (size_t y = 0; y < py.size(); ++y)
    if (py[y] > 0.0 && !(qy[y] > 0.0)) {
      throw SupportViolation("supp(P_Y) is not contained in supp(Q_Y)", static_cast<int>(y));
    }
  if (std::fabs(theta) < kThetaZero) {
    double h = 0.0;
    for (int x = 0; x < pxy.rows(); ++x)
      for (int y = 0; y < pxy.cols(); ++y) {
        const double v = pxy(x, y);
        if (v > 0.0) h -= v * std::log(v / qy[y]);
      }
    return h;
  }
  std::vector<double> terms;
  for (int x = 0; x < pxy.rows(); ++x)
    for (int y = 0; y < pxy.cols(); ++y) {
      const double lp = safe_log(pxy(x, y));
      terms.push_back(lp == kNegInf ? kNegInf : tilt(lp, theta) - theta * std::log(qy[y]));
    }
  return -log_sum_exp(terms) / theta;
}

std::vector<double> optimal_conditioning(const Matrix& pxy, double theta) {
  const auto lc = log_column_power(pxy, theta);
  std::vector<double> t(lc.size());
  for (size_t y = 0; y < lc.size(); ++y) t[y] = lc[y] == kNegInf ? kNegInf : lc[y] / (1.0 + theta);
  const double z = log_sum_exp(t);
  std::vector<double> q(lc.size());
  for (size_t y = 0; y < lc.size(); ++y) q[y] = t[y] == kNegInf ? 0.0 : std::exp(t[y] - z);
  return q;
}

double cond_min_entropy(const Matrix& pxy, MinVariant variant) {
  const auto py = column_sums(pxy);
  if (variant == MinVariant::kPlain) {
    double top = 0.0;
    for (int x = 0; x < pxy.rows(); ++x)
      for (int y = 0; y < pxy.cols(); ++y) top = std::max(top, pxy(x, y));
    return -std::log(top);
  }
  if (variant == MinVariant::kLower) {
    double top = 0.0;
    for (int y = 0; y < pxy.cols(); ++y) {
      if (!(py[y] > 0.0)) continue;
      for (int x = 0; x < pxy.rows(); ++x) top = std::max(top, pxy(x, y) / py[y]);
    }
    return -std::log(top);
  }
  double acc = 0.0;
  for (int y = 0; y < pxy.cols(); ++y) {
    double top = 0.0;
    for (int x = 0; x < pxy.rows(); ++x) top = std::max(top, pxy(x, y));
    acc += top;
  }
  return -std::log(acc);
}

// ---------------------------------------------------------------------------
// Curves

double ThetaCurve::rate(double theta) const {
  if (std::fabs(theta) < kThetaZero) return derivative(0.0);
  return scaled(theta) / theta;
}

double ThetaCurve::variance() const {
  // Richardson extrapolation of the symmetric second difference.
  const double h = 1e-3;
  const double f0 = scaled(0.0);
  auto second = [&](double step) {
    return -(scaled(step) + scaled(-step) - 2.0 * f0) / (step * step);
  };
  return (4.0 * second(h / 2) - second(h)) / 3.0;
}

DistributionCurve::DistributionCurve(const std::vector<double>& p)
    : pxy_(as_column(p)), variant_(CondVariant::kLower) {}

DistributionCurve::DistributionCurve(const Matrix& pxy, CondVariant variant)
    : pxy_(pxy), variant_(variant) {
  if (variant == CondVariant::kTwoParam) {
    throw std::invalid_argument("DistributionCurve: two-parameter variant is not supported");
  }
}

double DistributionCurve::scaled(double theta) const {
  return variant_ == CondVariant::kLower ? lower_scaled(pxy_, theta) : upper_scaled(pxy_, theta);
}

double DistributionCurve::derivative(double theta) const {
  const auto py = column_sums(pxy_);
  if (variant_ == CondVariant::kLower) {
    // -sum w log(P/P_Y) / sum w with w = P^{1+theta} P_Y^{-theta}
    std::vector<double> lw;
    std::vector<double> g;
    for (int x = 0; x < pxy_.rows(); ++x)
      for (int y = 0; y < pxy_.cols(); ++y) {
        const double v = pxy_(x, y);
        if (!(v > 0.0)) continue;
        const double lr = std::log(v / py[y]);
        lw.push_back((1.0 + theta) * std::log(v) - theta * std::log(py[y]));
        g.push_back(lr);
      }
    const double z = log_sum_exp(lw);
    double acc = 0.0;
    for (size_t i = 0; i < lw.size(); ++i) acc += std::exp(lw[i] - z) * g[i];
    return -acc;
  }
  // upper: scaled = -(1+theta) log Z, Z = sum_y S_y^{1/(1+theta)}
  const double a = 1.0 + theta;
  std::vector<double> lt(pxy_.cols(), kNegInf), dlt(pxy_.cols(), 0.0);
  for (int y = 0; y < pxy_.cols(); ++y) {
    std::vector<double> terms;
    std::vector<double> logs;
    for (int x = 0; x < pxy_.rows(); ++x) {
      const double v = pxy_(x, y);
      if (!(v > 0.0)) continue;
      terms.push_back(a * std::log(v));
      logs.push_back(std::log(v));
    }
    if (terms.empty()) continue;
    const double ls = log_sum_exp(terms);
    double ds = 0.0;  // S'_y / S_y
    for (size_t i = 0; i < terms.size(); ++i) ds += std::exp(terms[i] - ls) * logs[i];
    lt[y] = ls / a;
    dlt[y] = -ls / (a * a) + ds / a;
  }
  const double lz = log_sum_exp(lt);
  double dz = 0.0;  // Z'/Z
  for (int y = 0; y < pxy_.cols(); ++y)
    if (lt[y] != kNegInf) dz += std::exp(lt[y] - lz) * dlt[y];
  return -lz - a * dz;
}

// ---------------------------------------------------------------------------
// Transition-matrix profile

RenyiProfile::RenyiProfile(const TransitionModel& model, Variant variant, double theta_prime)
    : model_(model), variant_(variant), theta_prime_(theta_prime) {
  if (variant == Variant::kLower) require_assumption(model, Assumption::kA1);
  if (variant == Variant::kUpper || variant == Variant::kTwoParam) {
    require_assumption(model, Assumption::kA2);
  }
  if (variant == Variant::kTwoParam && !(theta_prime > -1.0)) {
    throw std::invalid_argument("two-parameter profile needs theta' > -1");
  }
  const int k = model.states();
  log_w_ = Matrix(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) log_w_(i, j) = safe_log(model.kernel(i, j));
  if (variant == Variant::kLower) {
    const Matrix wy = y_kernel(model);
    log_wy_ = Matrix(wy.rows(), wy.cols());
    for (int i = 0; i < wy.rows(); ++i)
      for (int j = 0; j < wy.cols(); ++j) log_wy_(i, j) = safe_log(wy(i, j));
  }
  if (variant == Variant::kTwoParam && theta_prime != 0.0) {
    RenyiProfile upper(model, Variant::kUpper);
    log_kappa_prime_ = upper.log_eigenvalue(theta_prime);
    xi_prime_ = upper.corrections(theta_prime);
  } else if (variant == Variant::kTwoParam) {
    xi_prime_ = RenyiProfile(model, Variant::kUpper).corrections(0.0);
  }
}

double RenyiProfile::log_wy_theta(int y, int yp, double theta) const {
  std::vector<double> terms(model_.x_size);
  for (int x = 0; x < model_.x_size; ++x)
    terms[x] = tilt(log_w_(model_.index(x, y), model_.index(0, yp)), theta);
  return log_sum_exp(terms);
}

Matrix RenyiProfile::log_matrix(double theta) const {
  const int k = model_.states();
  const int ny = model_.y_size;
  switch (variant_) {
    case Variant::kSingle: {
      Matrix out(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) out(i, j) = tilt(log_w_(i, j), theta);
      return out;
    }
    case Variant::kLower: {
      Matrix out(k, k);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          const double lw = log_w_(i, j);
          out(i, j) = lw == kNegInf
                          ? kNegInf
                          : tilt(lw, theta) - theta * log_wy_(model_.y_of(i), model_.y_of(j));
        }
      return out;
    }
    case Variant::kUpper: {
      if (!(theta > -1.0)) throw std::invalid_argument("upper profile needs theta > -1");
      Matrix out(ny, ny);
      for (int y = 0; y < ny; ++y)
        for (int yp = 0; yp < ny; ++yp) {
          const double l = log_wy_theta(y, yp, theta);
          out(y, yp) = l == kNegInf ? kNegInf : l / (1.0 + theta);
        }
      return out;
    }
    case Variant::kTwoParam: {
      Matrix out(ny, ny);
      const double c = theta / (1.0 + theta_prime_);
      for (int y = 0; y < ny; ++y)
        for (int yp = 0; yp < ny; ++yp) {
          const double a = log_wy_theta(y, yp, theta);
          out(y, yp) = a == kNegInf ? kNegInf : a - c * log_wy_theta(y, yp, theta_prime_);
        }
      return out;
    }
  }
  return Matrix();
}

RenyiProfile::Spectral RenyiProfile::spectral(double theta, Normalization normalization) const {
  auto [m, top] = exp_scaled(log_matrix(theta));
  Spectral sp;
  sp.perron = perron_scaled(m, top, normalization);
  sp.scaled = std::move(m);
  sp.log_scale = top;
  return sp;
}

double RenyiProfile::log_eigenvalue(double theta) const {
  return spectral(theta, Normalization::kSumOne).perron.log_eigenvalue;
}

double RenyiProfile::scaled(double theta) const { return scaled_from_log(theta, log_eigenvalue(theta)); }

double RenyiProfile::scaled_from_log(double theta, double ll) const {
  switch (variant_) {
    case Variant::kSingle:
    case Variant::kLower:
      return -ll;
    case Variant::kUpper:
      return -(1.0 + theta) * ll;
    case Variant::kTwoParam:
      return -ll - theta * log_kappa_prime_;
  }
  return 0.0;
}

double RenyiProfile::derivative(double theta) const {
  if (variant_ == Variant::kUpper || variant_ == Variant::kTwoParam) {
    const double h = 1e-5 * std::max(1.0, std::fabs(theta));
    if (theta - h <= -1.0) return (scaled(theta + h) - scaled(theta)) / h;
    return (scaled(theta + h) - scaled(theta - h)) / (2.0 * h);
  }
  // Hellmann-Feynman: lambda' = <l, (W~ o G) r> / <l, r>, G = log(W / W_Y)
  const Spectral sp = spectral(theta, Normalization::kSumOne);
  const auto& l = sp.perron.left;
  const auto& r = sp.perron.right;
  const int k = model_.states();
  double num = 0.0, lr = 0.0, lmr = 0.0;
  for (int i = 0; i < k; ++i) {
    lr += l[i] * r[i];
    for (int j = 0; j < k; ++j) {
      const double m = sp.scaled(i, j);
      if (m == 0.0) continue;
      double g = log_w_(i, j);
      if (variant_ == Variant::kLower) g -= log_wy_(model_.y_of(i), model_.y_of(j));
      num += l[i] * m * g * r[j];
      lmr += l[i] * m * r[j];
    }
  }
  // lmr / lr is the scaled eigenvalue (two-sided Rayleigh quotient)
  return -num / lmr;
}

CorrectionTerms RenyiProfile::corrections(double theta) const { return evaluate(theta).corrections; }

ProfilePoint RenyiProfile::evaluate(double theta) const {
  const Spectral sp = spectral(theta, Normalization::kMinEntryOne);
  ProfilePoint point;
  point.scaled = scaled_from_log(theta, sp.perron.log_eigenvalue);
  const auto& v = sp.perron.left;
  const double log_max_v = std::log(*std::max_element(v.begin(), v.end()));
  const int ny = model_.y_size;
  std::vector<double> log_w;

  if (variant_ == Variant::kSingle || variant_ == Variant::kLower) {
    std::vector<double> py(ny, 0.0);
    for (int s = 0; s < model_.states(); ++s) py[model_.y_of(s)] += model_.initial[s];
    for (int s = 0; s < model_.states(); ++s) {
      const double lp = safe_log(model_.initial[s]);
      double lw = tilt(lp, theta);
      if (variant_ == Variant::kLower && lw != kNegInf) lw -= theta * std::log(py[model_.y_of(s)]);
      log_w.push_back(lw);
    }
  } else {
    Matrix p1(model_.x_size, ny);
    for (int s = 0; s < model_.states(); ++s) p1(model_.x_of(s), model_.y_of(s)) = model_.initial[s];
    const auto la = log_column_power(p1, theta);
    if (variant_ == Variant::kUpper) {
      for (int y = 0; y < ny; ++y) log_w.push_back(la[y] == kNegInf ? kNegInf : la[y] / (1.0 + theta));
    } else {
      const auto lb = log_column_power(p1, theta_prime_);
      const double c = theta / (1.0 + theta_prime_);
      for (int y = 0; y < ny; ++y) log_w.push_back(la[y] == kNegInf ? kNegInf : la[y] - c * lb[y]);
    }
  }

  std::vector<double> terms(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    terms[i] = log_w[i] == kNegInf ? kNegInf : std::log(v[i]) + log_w[i];
  const double base = -log_sum_exp(terms);

  CorrectionTerms& out = point.corrections;
  if (variant_ != Variant::kTwoParam) {
    out.lower = base;
    out.upper = base + log_max_v;
    return point;
  }
  const CorrectionTerms& xi = xi_prime_;
  if (theta >= 0.0) {
    out.lower = base + theta * xi.lower;
    out.upper = base + log_max_v + theta * xi.upper;
  } else {
    out.lower = base + theta * xi.upper;
    out.upper = base + log_max_v + theta * xi.lower;
  }
  return point;
}

double renyi_rate(const TransitionModel& model, double theta, Variant variant, double theta_prime) {
  return RenyiProfile(model, variant, theta_prime).rate(theta);
}

double entropy_rate(const TransitionModel& model, bool conditional) {
  return RenyiProfile(model, conditional ? Variant::kLower : Variant::kSingle).entropy_rate();
}

double variance_rate(const TransitionModel& model, bool conditional) {
  return RenyiProfile(model, conditional ? Variant::kLower : Variant::kSingle).variance();
}

MinEntropyCertificate min_entropy_rate(const TransitionModel& model, MinVariant variant) {
  const int k = model.states();
  if (variant == MinVariant::kUpper) {
    require_assumption(model, Assumption::kA2);
    const int ny = model.y_size;
    // W_Y(y|y') T(y|y') = max_x W(x,y|x',y')
    Matrix m(ny, ny);
    for (int y = 0; y < ny; ++y)
      for (int yp = 0; yp < ny; ++yp)
        for (int x = 0; x < model.x_size; ++x)
          m(y, yp) = std::max(m(y, yp), model.kernel(model.index(x, y), model.index(0, yp)));
    MinEntropyCertificate cert;
    cert.rate = -perron(m).log_eigenvalue;
    cert.path_constant = std::numeric_limits<double>::quiet_NaN();
    return cert;
  }
  if (k > kMaxCycleStates) {
    throw StateSpaceTooLarge("cycle enumeration supports at most " + std::to_string(kMaxCycleStates) +
                             " states");
  }
  Matrix lw(k, k);
  Matrix log_wy;
  if (variant == MinVariant::kLower) {
    const Matrix wy = y_kernel(model);
    log_wy = Matrix(wy.rows(), wy.cols());
    for (int i = 0; i < wy.rows(); ++i)
      for (int j = 0; j < wy.cols(); ++j) log_wy(i, j) = safe_log(wy(i, j));
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      double l = safe_log(model.kernel(i, j));
      if (variant == MinVariant::kLower && l != kNegInf) l -= log_wy(model.y_of(i), model.y_of(j));
      lw(i, j) = l;
    }
  return cycle_certificate(lw);
}

CorrectionTerms correction_terms(const TransitionModel& model, CorrectionKind kind, double theta,
                                 double theta_prime) {
  switch (kind) {
    case CorrectionKind::kDelta:
      return RenyiProfile(model, model.single_terminal() ? Variant::kSingle : Variant::kLower)
          .corrections(theta);
    case CorrectionKind::kXi:
      return RenyiProfile(model, Variant::kUpper).corrections(theta);
    case CorrectionKind::kZeta:
      return RenyiProfile(model, Variant::kTwoParam, theta_prime).corrections(theta);
    case CorrectionKind::kDeltaInf: {
      const auto cert = min_entropy_rate(model, MinVariant::kPlain);
      const double log_p1 = std::log(*std::max_element(model.initial.begin(), model.initial.end()));
      const double log_a = std::log(cert.path_constant);
      CorrectionTerms out;
      out.lower = -log_p1 + log_a;
      out.upper = cert.cycle_length * cert.rate - log_p1 - std::min(log_a, -cert.rate);
      return out;
    }
  }
  return {};
}

}  // namespace markovrng
