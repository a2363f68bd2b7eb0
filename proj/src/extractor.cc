#include "markovrng/extractor.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include "json.hpp"
#include "markovrng/errors.h"
#include "markovrng/oracle.h"

namespace markovrng {

namespace {

int parity(uint64_t w) { return std::popcount(w) & 1; }

void check_budget(double log2_size, const char* what) {
  if (log2_size > 24.0 + 1e-9) throw BudgetExceeded(std::string(what) + " exceeds the 2^24 enumeration budget");
}

// P_{X^n} over little-endian codes, marginalizing Y by a forward pass.
std::vector<double> x_distribution(const TransitionModel& model, int n) {
  const int nx = model.x_size, ny = model.y_size;
  // alpha[code * ny + y]: mass of x^t = code with y_t = y.
  std::vector<double> alpha(static_cast<size_t>(nx) * ny, 0.0);
  for (int s = 0; s < model.states(); ++s) alpha[model.x_of(s) * ny + model.y_of(s)] = model.initial[s];
  int64_t len = nx, top = 1;
  for (int t = 1; t < n; ++t) {
    std::vector<double> next(static_cast<size_t>(len * nx) * ny, 0.0);
    for (int64_t code = 0; code < len; ++code) {
      const int x_last = static_cast<int>(code / top);
      for (int yp = 0; yp < ny; ++yp) {
        const double a = alpha[code * ny + yp];
        if (a == 0.0) continue;
        const int from = model.index(x_last, yp);
        for (int x = 0; x < nx; ++x)
          for (int y = 0; y < ny; ++y) next[(code + x * len) * ny + y] += a * model.kernel(model.index(x, y), from);
      }
    }
    alpha.swap(next);
    top = len;
    len *= nx;
  }
  std::vector<double> p(len, 0.0);
  for (int64_t code = 0; code < len; ++code)
    for (int y = 0; y < ny; ++y) p[code] += alpha[code * ny + y];
  return p;
}

// Sparse joint law of (X^n code, Y^n code).
struct JointCells {
  std::vector<int64_t> x;
  std::vector<int64_t> y;
  std::vector<double> p;
  std::vector<double> py;  // marginal of Y^n
};

JointCells joint_cells(const TransitionModel& model, int n) {
  const ExactDistribution d = enumerate(model, n);
  JointCells c;
  c.py.assign(d.y_outcomes(), 0.0);
  for (int64_t o = 0; o < d.size(); ++o) {
    if (d.probabilities[o] == 0.0) continue;
    c.x.push_back(d.x_code(o));
    c.y.push_back(d.y_code(o));
    c.p.push_back(d.probabilities[o]);
    c.py[c.y.back()] += d.probabilities[o];
  }
  return c;
}

double tv_to_uniform(const std::vector<double>& q, double M) {
  double tv = 0.0;
  for (double v : q) tv += std::fabs(v - 1.0 / M);
  return std::min(1.0, 0.5 * tv);
}

// sum_{k,y} |Q(k,y) - P(y)/M| / 2, with Q laid out as k * |Y^n| + y.
double tv_with_side(const std::vector<double>& q, const std::vector<double>& py, double M) {
  const size_t ny = py.size();
  double tv = 0.0;
  for (size_t i = 0; i < q.size(); ++i) tv += std::fabs(q[i] - py[i % ny] / M);
  return std::min(1.0, 0.5 * tv);
}

// Column-wise cumulative kernel and initial law for sampling.
class ChainSampler {
 public:
  explicit ChainSampler(const TransitionModel& model) {
    const int S = model.states();
    init_.resize(S);
    std::partial_sum(model.initial.begin(), model.initial.end(), init_.begin());
    cols_.assign(S, std::vector<double>(S));
    for (int j = 0; j < S; ++j) {
      double acc = 0.0;
      for (int i = 0; i < S; ++i) cols_[j][i] = acc += model.kernel(i, j);
    }
  }

  template <class Rng>
  void block(Rng& rng, int n, std::vector<int>& states) const {
    states.resize(n);
    int s = draw(init_, rng);
    states[0] = s;
    for (int t = 1; t < n; ++t) states[t] = s = draw(cols_[s], rng);
  }

 private:
  template <class Rng>
  static int draw(const std::vector<double>& cum, Rng& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, cum.back())(rng);
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    int k = static_cast<int>(it - cum.begin());
    if (k >= static_cast<int>(cum.size())) k = static_cast<int>(cum.size()) - 1;
    // never land on a zero-probability state at the right edge
    while (k > 0 && cum[k] == cum[k - 1]) --k;
    return k;
  }

  std::vector<double> init_;
  std::vector<std::vector<double>> cols_;
};

void encode_block(const TransitionModel& model, const std::vector<int>& states, int b, uint64_t* words,
                  int n_words) {
  std::fill(words, words + n_words, 0);
  for (size_t t = 0; t < states.size(); ++t) {
    const int x = model.x_of(states[t]);
    for (int j = 0; j < b; ++j)
      if ((x >> j) & 1) {
        const size_t bit = t * b + j;
        words[bit / 64] |= uint64_t{1} << (bit % 64);
      }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ToeplitzSpec make_toeplitz(int n, int m, Bits seed) {
  if (n < 1 || m < 1 || m > n) throw LengthMismatch("Toeplitz needs 1 <= m <= n");
  if (static_cast<int>(seed.size()) != n + m - 1) {
    throw LengthMismatch("seed has " + std::to_string(seed.size()) + " bits, expected " + std::to_string(n + m - 1));
  }
  for (auto& b : seed) b = b ? 1 : 0;
  return {n, m, std::move(seed)};
}

ToeplitzSpec toeplitz_from_index(int n, int m, uint64_t index) {
  Bits seed(n + m - 1, 0);
  for (int i = 0; i < n + m - 1 && i < 64; ++i) seed[i] = (index >> i) & 1;
  return make_toeplitz(n, m, std::move(seed));
}

ToeplitzSpec toeplitz_from_hex(int n, int m, const std::string& hex) {
  std::string h = hex;
  if (h.rfind("0x", 0) == 0 || h.rfind("0X", 0) == 0) h = h.substr(2);
  if (h.size() % 2) h = "0" + h;
  std::vector<uint8_t> bytes;
  for (size_t i = 0; i < h.size(); i += 2) {
    const std::string byte = h.substr(i, 2);
    if (!std::isxdigit(static_cast<unsigned char>(byte[0])) || !std::isxdigit(static_cast<unsigned char>(byte[1]))) {
      throw MalformedDocument("seed is not hexadecimal: " + hex);
    }
    bytes.push_back(static_cast<uint8_t>(std::stoi(byte, nullptr, 16)));
  }
  Bits bits = unpack_bits(bytes);
  if (static_cast<int>(bits.size()) < n + m - 1) {
    throw LengthMismatch("seed has " + std::to_string(bits.size()) + " bits, needs " + std::to_string(n + m - 1));
  }
  bits.resize(n + m - 1);
  return make_toeplitz(n, m, std::move(bits));
}

ToeplitzSpec toeplitz_from_rng(int n, int m, uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  Bits seed(n + m - 1);
  for (auto& b : seed) b = rng() & 1;
  return make_toeplitz(n, m, std::move(seed));
}

ToeplitzHash::ToeplitzHash(const ToeplitzSpec& spec) : n_(spec.n), m_(spec.m), words_((spec.n + 63) / 64) {
  if (static_cast<int>(spec.seed.size()) != n_ + m_ - 1) throw LengthMismatch("seed length");
  rows_.assign(static_cast<size_t>(m_) * words_, 0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < n_; ++j)
      if (spec.seed[i + (n_ - 1) - j]) rows_[i * words_ + j / 64] |= uint64_t{1} << (j % 64);
}

void ToeplitzHash::apply(const uint64_t* input, uint64_t* output) const {
  const int out_words = (m_ + 63) / 64;
  std::fill(output, output + out_words, 0);
  for (int i = 0; i < m_; ++i) {
    uint64_t acc = 0;
    const uint64_t* row = &rows_[i * words_];
    for (int w = 0; w < words_; ++w) acc ^= row[w] & input[w];
    if (parity(acc)) output[i / 64] |= uint64_t{1} << (i % 64);
  }
}

uint64_t ToeplitzHash::apply_word(uint64_t input) const {
  uint64_t out = 0;
  for (int i = 0; i < m_; ++i) out |= static_cast<uint64_t>(parity(rows_[i] & input)) << i;
  return out;
}

Bits ToeplitzHash::operator()(const Bits& input) const {
  if (static_cast<int>(input.size()) != n_) {
    throw LengthMismatch("input has " + std::to_string(input.size()) + " bits, expected " + std::to_string(n_));
  }
  std::vector<uint64_t> in(words_, 0), out((m_ + 63) / 64, 0);
  for (int j = 0; j < n_; ++j)
    if (input[j]) in[j / 64] |= uint64_t{1} << (j % 64);
  apply(in.data(), out.data());
  Bits y(m_);
  for (int i = 0; i < m_; ++i) y[i] = (out[i / 64] >> (i % 64)) & 1;
  return y;
}

Bits hash(const ToeplitzSpec& spec, const Bits& input) { return ToeplitzHash(spec)(input); }

std::string distance_method_name(DistanceMethod m) {
  switch (m) {
    case DistanceMethod::kExactEnumeration: return "exact_enumeration";
    case DistanceMethod::kFamilyExact: return "family_exact";
    case DistanceMethod::kMonteCarlo: return "monte_carlo";
  }
  return "?";
}

int bits_per_symbol(const TransitionModel& model) {
  const int x = model.x_size;
  if (x < 2 || (x & (x - 1)) != 0) {
    throw MalformedDocument("extraction needs |X| to be a power of two, got " + std::to_string(x));
  }
  return std::countr_zero(static_cast<unsigned>(x));
}

// ---------------------------------------------------------------------------

DistanceEstimate exact_delta(const TransitionModel& model, int n, const std::vector<uint32_t>& table, uint32_t M,
                             bool side_info) {
  const int b = bits_per_symbol(model);
  if (static_cast<int64_t>(table.size()) != (int64_t{1} << (n * b))) {
    throw LengthMismatch("function table must cover all |X|^n inputs");
  }
  if (M < 1) throw std::invalid_argument("M must be positive");
  for (uint32_t v : table)
    if (v >= M) throw LengthMismatch("function value outside [0, M)");
  DistanceEstimate est;
  est.method = DistanceMethod::kExactEnumeration;
  if (!side_info) {
    check_budget(n * b + std::log2(static_cast<double>(model.states())), "single-function evaluation");
    const auto p = x_distribution(model, n);
    std::vector<double> q(M, 0.0);
    for (size_t code = 0; code < p.size(); ++code) q[table[code]] += p[code];
    est.value = tv_to_uniform(q, M);
    return est;
  }
  check_budget(n * std::log2(static_cast<double>(model.states())), "side-information evaluation");
  const JointCells c = joint_cells(model, n);
  const size_t ny = c.py.size();
  std::vector<double> q(static_cast<size_t>(M) * ny, 0.0);
  for (size_t i = 0; i < c.p.size(); ++i) q[table[c.x[i]] * ny + c.y[i]] += c.p[i];
  est.value = tv_with_side(q, c.py, M);
  return est;
}

DistanceEstimate exact_delta(const TransitionModel& model, int n, const ToeplitzSpec& spec, bool side_info) {
  const int b = bits_per_symbol(model);
  if (spec.n != n * b) throw LengthMismatch("Toeplitz input length differs from n * bits per symbol");
  if (spec.m > 32) throw BudgetExceeded("exact evaluation needs m <= 32");
  check_budget(n * b, "input space");
  const ToeplitzHash h(spec);
  std::vector<uint32_t> table(int64_t{1} << spec.n);
  for (uint64_t code = 0; code < table.size(); ++code) table[code] = static_cast<uint32_t>(h.apply_word(code));
  return exact_delta(model, n, table, uint32_t{1} << spec.m, side_info);
}

DistanceEstimate exact_family_delta(const TransitionModel& model, int n, int m, bool side_info) {
  const int b = bits_per_symbol(model);
  const int nb = n * b;
  if (m < 1 || m > nb) throw LengthMismatch("family needs 1 <= m <= n bits");
  check_budget(static_cast<double>(nb + m - 1) + nb, "Toeplitz family average");
  const uint64_t seeds = uint64_t{1} << (nb + m - 1);
  const uint32_t M = uint32_t{1} << m;

  std::vector<double> p;
  JointCells cells;
  if (side_info) {
    cells = joint_cells(model, n);
  } else {
    p = x_distribution(model, n);
  }
  const size_t ny = side_info ? cells.py.size() : 1;
  std::vector<double> q(static_cast<size_t>(M) * ny);
  // Deterministic order: seeds ascending, pairwise partial sums per block.
  std::vector<double> per_seed(seeds);
  for (uint64_t s = 0; s < seeds; ++s) {
    const ToeplitzHash h(toeplitz_from_index(nb, m, s));
    std::fill(q.begin(), q.end(), 0.0);
    if (side_info) {
      for (size_t i = 0; i < cells.p.size(); ++i) q[h.apply_word(cells.x[i]) * ny + cells.y[i]] += cells.p[i];
      per_seed[s] = tv_with_side(q, cells.py, M);
    } else {
      for (uint64_t code = 0; code < p.size(); ++code)
        if (p[code] > 0.0) q[h.apply_word(code)] += p[code];
      per_seed[s] = tv_to_uniform(q, M);
    }
  }
  // fixed-order pairwise reduction
  while (per_seed.size() > 1) {
    std::vector<double> next((per_seed.size() + 1) / 2);
    for (size_t i = 0; i < next.size(); ++i)
      next[i] = per_seed[2 * i] + (2 * i + 1 < per_seed.size() ? per_seed[2 * i + 1] : 0.0);
    per_seed.swap(next);
  }
  DistanceEstimate est;
  est.method = DistanceMethod::kFamilyExact;
  est.value = per_seed[0] / static_cast<double>(seeds);
  return est;
}

// ---------------------------------------------------------------------------

DistanceEstimate mc_delta(const TransitionModel& model, int n, const ToeplitzSpec& spec, int64_t samples,
                          uint64_t seed) {
  if (samples < 1000) throw std::invalid_argument("Monte Carlo needs at least 1000 samples");
  const int b = bits_per_symbol(model);
  if (spec.n != n * b) throw LengthMismatch("Toeplitz input length differs from n * bits per symbol");
  if (spec.m > 24) throw BudgetExceeded("Monte Carlo histogram needs m <= 24");
  const ToeplitzHash h(spec);
  const ChainSampler sampler(model);
  std::mt19937_64 rng(seed);
  const int words = (spec.n + 63) / 64;
  std::vector<uint64_t> in(words), out(1);
  std::vector<int> states;
  std::vector<uint32_t> outputs(samples);
  const uint32_t M = uint32_t{1} << spec.m;
  for (int64_t i = 0; i < samples; ++i) {
    sampler.block(rng, n, states);
    encode_block(model, states, b, in.data(), words);
    h.apply(in.data(), out.data());
    outputs[i] = static_cast<uint32_t>(out[0]);
  }
  auto plug_in = [&](const std::vector<uint32_t>& counts) {
    double tv = 0.0;
    for (uint32_t c : counts) tv += std::fabs(static_cast<double>(c) / samples - 1.0 / M);
    return 0.5 * tv;
  };
  std::vector<uint32_t> counts(M, 0);
  for (uint32_t o : outputs) ++counts[o];
  DistanceEstimate est;
  est.method = DistanceMethod::kMonteCarlo;
  est.rigorous = false;
  est.value = std::min(1.0, plug_in(counts));

  std::vector<double> boot(kBootstrapResamples);
  std::uniform_int_distribution<int64_t> pick(0, samples - 1);
  for (int r = 0; r < kBootstrapResamples; ++r) {
    std::fill(counts.begin(), counts.end(), 0);
    for (int64_t i = 0; i < samples; ++i) ++counts[outputs[pick(rng)]];
    boot[r] = plug_in(counts);
  }
  std::sort(boot.begin(), boot.end());
  const double lo = boot[static_cast<size_t>(0.025 * (kBootstrapResamples - 1))];
  const double hi = boot[static_cast<size_t>(std::ceil(0.975 * (kBootstrapResamples - 1)))];
  est.ci95 = 0.5 * (hi - lo);
  return est;
}

Bits sample_bits(const TransitionModel& model, int n, int64_t blocks, uint64_t seed) {
  const int b = bits_per_symbol(model);
  const ChainSampler sampler(model);
  std::mt19937_64 rng(seed);
  Bits bits;
  bits.reserve(static_cast<size_t>(blocks) * n * b);
  std::vector<int> states;
  for (int64_t k = 0; k < blocks; ++k) {
    sampler.block(rng, n, states);
    for (int s : states) {
      const int x = model.x_of(s);
      for (int j = 0; j < b; ++j) bits.push_back((x >> j) & 1);
    }
  }
  return bits;
}

// ---------------------------------------------------------------------------

Bits unpack_bits(const std::vector<uint8_t>& bytes) {
  Bits bits(bytes.size() * 8);
  for (size_t i = 0; i < bits.size(); ++i) bits[i] = (bytes[i / 8] >> (i % 8)) & 1;
  return bits;
}

std::vector<uint8_t> pack_bits(const Bits& bits) {
  std::vector<uint8_t> bytes((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
  return bytes;
}

Bits read_bit_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedDocument("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return unpack_bits(bytes);
}

void write_bit_file(const std::string& path, const Bits& bits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MalformedDocument("cannot write " + path);
  const auto bytes = pack_bits(bits);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ExtractionResult extract_stream(const Bits& input, const ToeplitzSpec& spec, const TransitionModel* model,
                                Audit audit, uint64_t audit_seed) {
  if (input.size() % spec.n != 0) {
    throw LengthMismatch("input length " + std::to_string(input.size()) + " is not a multiple of n = " +
                         std::to_string(spec.n));
  }
  const ToeplitzHash h(spec);
  ExtractionResult res;
  ExtractionReport& rep = res.report;
  rep.blocks = static_cast<int64_t>(input.size() / spec.n);
  rep.input_bits = static_cast<int64_t>(input.size());
  res.output.reserve(static_cast<size_t>(rep.blocks) * spec.m);
  const int words = (spec.n + 63) / 64;
  std::vector<uint64_t> in(words), out((spec.m + 63) / 64);
  for (int64_t k = 0; k < rep.blocks; ++k) {
    std::fill(in.begin(), in.end(), 0);
    for (int j = 0; j < spec.n; ++j)
      if (input[k * spec.n + j]) in[j / 64] |= uint64_t{1} << (j % 64);
    h.apply(in.data(), out.data());
    for (int i = 0; i < spec.m; ++i) res.output.push_back((out[i / 64] >> (i % 64)) & 1);
  }
  rep.output_bits = static_cast<int64_t>(res.output.size());

  if (model) {
    const int b = bits_per_symbol(*model);
    if (spec.n % b) throw LengthMismatch("n is not a whole number of symbols");
    const int symbols = spec.n / b;
    rep.rate = spec.m * std::log(2.0) / symbols;
    if (model->single_terminal() && symbols >= 2) {
      BoundQuery q;
      q.n = symbols;
      q.log_m = spec.m * std::log(2.0);
      rep.bound = urng_markov_bound(*model, Theorem::kAch, q);
      if (rep.bound->value) rep.epsilon_bound = std::min(1.0, std::exp(-*rep.bound->value));
    }
    if (audit == Audit::kExact) rep.audit = exact_delta(*model, symbols, spec);
    if (audit == Audit::kMonteCarlo) rep.audit = mc_delta(*model, symbols, spec, 10000, audit_seed);
  }
  return res;
}

std::string extraction_report_to_json(const ExtractionReport& r) {
  nlohmann::ordered_json j;
  j["blocks"] = r.blocks;
  j["input_bits"] = r.input_bits;
  j["output_bits"] = r.output_bits;
  j["rate"] = r.rate;
  if (r.bound) j["bound"] = nlohmann::ordered_json::parse(report_to_json(*r.bound));
  else j["bound"] = nullptr;
  if (r.epsilon_bound) j["epsilon_bound"] = *r.epsilon_bound;
  else j["epsilon_bound"] = nullptr;
  if (r.audit) {
    nlohmann::ordered_json a;
    a["value"] = r.audit->value;
    a["method"] = distance_method_name(r.audit->method);
    a["ci95"] = r.audit->ci95 ? nlohmann::ordered_json(*r.audit->ci95) : nlohmann::ordered_json(nullptr);
    a["rigorous"] = r.audit->rigorous;
    j["audit"] = a;
  } else {
    j["audit"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace markovrng
