#ifndef MARKOVRNG_EXTRACTOR_H_
#define MARKOVRNG_EXTRACTOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "markovrng/bounds.h"
#include "markovrng/markov_core.h"

namespace markovrng {

using Bits = std::vector<uint8_t>;  // one bit per entry, values 0/1

// Toeplitz matrix over GF(2): T[i][j] = seed[i + (n-1) - j], i < m, j < n.
struct ToeplitzSpec {
  int n = 0;
  int m = 0;
  Bits seed;  // n + m - 1 bits
};

// Throws LengthMismatch when the seed length is wrong or m > n.
ToeplitzSpec make_toeplitz(int n, int m, Bits seed);
// Seed bits are the little-endian bits of `index`.
ToeplitzSpec toeplitz_from_index(int n, int m, uint64_t index);
// Packed little-endian hex (byte order as written); needs >= n+m-1 bits.
ToeplitzSpec toeplitz_from_hex(int n, int m, const std::string& hex);
// Seed drawn from a deterministic generator.
ToeplitzSpec toeplitz_from_rng(int n, int m, uint64_t rng_seed);

// Row-packed form for repeated hashing.
class ToeplitzHash {
 public:
  explicit ToeplitzHash(const ToeplitzSpec& spec);
  Bits operator()(const Bits& input) const;
  // Input and output as packed words, bit j of the input at word j/64.
  void apply(const uint64_t* input, uint64_t* output) const;
  // n <= 64 and m <= 64 shortcut.
  uint64_t apply_word(uint64_t input) const;
  int n() const { return n_; }
  int m() const { return m_; }

 private:
  int n_, m_, words_;
  std::vector<uint64_t> rows_;  // m rows of `words_` words
};

Bits hash(const ToeplitzSpec& spec, const Bits& input);

enum class DistanceMethod { kExactEnumeration, kFamilyExact, kMonteCarlo };
std::string distance_method_name(DistanceMethod m);

struct DistanceEstimate {
  double value = 0.0;
  DistanceMethod method = DistanceMethod::kExactEnumeration;
  std::optional<double> ci95;  // Monte Carlo only
  bool rigorous = true;
};

// Bits per symbol for the binary encoding of X; throws MalformedDocument
// unless |X| is a power of two.
int bits_per_symbol(const TransitionModel& model);

// Exact variational distance of f(X^n) (with Y^n when side_info) to uniform.
// A function table maps every little-endian X^n code to an output in [0, M).
DistanceEstimate exact_delta(const TransitionModel& model, int n, const ToeplitzSpec& spec, bool side_info = false);
DistanceEstimate exact_delta(const TransitionModel& model, int n, const std::vector<uint32_t>& table, uint32_t M,
                             bool side_info = false);
// Average over all 2^(n+m-1) Toeplitz seeds for the given m.
DistanceEstimate exact_family_delta(const TransitionModel& model, int n, int m, bool side_info = false);

inline constexpr int kBootstrapResamples = 200;

// Plug-in estimate from `samples` independent blocks of length n started at
// the model's initial distribution. Not rigorous.
DistanceEstimate mc_delta(const TransitionModel& model, int n, const ToeplitzSpec& spec, int64_t samples,
                          uint64_t seed);

// Independent blocks of n symbols, encoded to bits.
Bits sample_bits(const TransitionModel& model, int n, int64_t blocks, uint64_t seed);

Bits read_bit_file(const std::string& path);
void write_bit_file(const std::string& path, const Bits& bits);
Bits unpack_bits(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> pack_bits(const Bits& bits);

enum class Audit { kNone, kExact, kMonteCarlo };

struct ExtractionReport {
  int64_t blocks = 0;
  int64_t input_bits = 0;
  int64_t output_bits = 0;
  double rate = 0.0;  // m log 2 / (symbols per block), nats
  std::optional<BoundReport> bound;   // achievability at that rate
  std::optional<double> epsilon_bound;  // exp(-bound.value)
  std::optional<DistanceEstimate> audit;
};

struct ExtractionResult {
  Bits output;
  ExtractionReport report;
};

// Hashes consecutive n-bit blocks. With a model, the report carries the
// achievability bound at rate m log 2 / n_symbols and an optional audit.
ExtractionResult extract_stream(const Bits& input, const ToeplitzSpec& spec,
                                const TransitionModel* model = nullptr, Audit audit = Audit::kNone,
                                uint64_t audit_seed = 1);

std::string extraction_report_to_json(const ExtractionReport& report);

}  // namespace markovrng

#endif  // MARKOVRNG_EXTRACTOR_H_
