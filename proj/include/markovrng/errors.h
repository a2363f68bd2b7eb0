#ifndef MARKOVRNG_ERRORS_H_
#define MARKOVRNG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace markovrng {

enum class ErrorKind {
  kMalformedDocument,
  kNotStochastic,
  kNotIrreducible,
  kConvergenceFailure,
  kAssumptionViolated,
  kSupportViolation,
  kStateSpaceTooLarge,
  kDegenerateVariance,
  kNoFeasiblePoint,
  kOutOfWindow,
  kInfeasible,
  kLengthMismatch,
  kBudgetExceeded,
};

const char* error_kind_name(ErrorKind kind);

// Base class of every error raised by the library. `index` carries an
// offending position when one exists (e.g. the column of a kernel).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, int index = -1)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        index_(index) {}

  ErrorKind kind() const { return kind_; }
  int index() const { return index_; }

  // Query-level failures (exit code 3) as opposed to validation failures.
  bool is_infeasible() const {
    return kind_ == ErrorKind::kInfeasible ||
           kind_ == ErrorKind::kNoFeasiblePoint ||
           kind_ == ErrorKind::kOutOfWindow;
  }

 private:
  ErrorKind kind_;
  int index_;
};

#define MARKOVRNG_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message, int index = -1)         \
        : Error(ErrorKind::k##Name, message, index) {}                \
  };

MARKOVRNG_DEFINE_ERROR(MalformedDocument)
MARKOVRNG_DEFINE_ERROR(NotStochastic)
MARKOVRNG_DEFINE_ERROR(NotIrreducible)
MARKOVRNG_DEFINE_ERROR(ConvergenceFailure)
MARKOVRNG_DEFINE_ERROR(AssumptionViolated)
MARKOVRNG_DEFINE_ERROR(SupportViolation)
MARKOVRNG_DEFINE_ERROR(StateSpaceTooLarge)
MARKOVRNG_DEFINE_ERROR(DegenerateVariance)
MARKOVRNG_DEFINE_ERROR(NoFeasiblePoint)
MARKOVRNG_DEFINE_ERROR(OutOfWindow)
MARKOVRNG_DEFINE_ERROR(Infeasible)
MARKOVRNG_DEFINE_ERROR(LengthMismatch)
MARKOVRNG_DEFINE_ERROR(BudgetExceeded)

#undef MARKOVRNG_DEFINE_ERROR

}  // namespace markovrng

#endif  // MARKOVRNG_ERRORS_H_
