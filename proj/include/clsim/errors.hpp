#pragma once

#include <stdexcept>
#include <string>

namespace clsim {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct VarianceOrderViolation : Error {
  using Error::Error;
};
struct NormBoundViolation : Error {
  using Error::Error;
};
struct NotPSD : Error {
  using Error::Error;
};
struct BudgetExceeded : Error {
  using Error::Error;
};
struct EmptySample : Error {
  using Error::Error;
};
struct DeltaOutOfRange : Error {
  using Error::Error;
};
struct TooFewSamples : Error {
  using Error::Error;
};
struct KappaBelowOne : Error {
  using Error::Error;
};
struct InsufficientBudget : Error {
  using Error::Error;
};
struct PreconditionViolated : Error {
  using Error::Error;
};
struct TauOutOfRange : Error {
  using Error::Error;
};
struct ParamOutOfRange : Error {
  using Error::Error;
};
struct SingularCovariance : Error {
  using Error::Error;
};
struct OrderingViolation : Error {
  using Error::Error;
};
struct DimensionTooSmall : Error {
  using Error::Error;
};
struct RegimeViolation : Error {
  using Error::Error;
};
struct InfeasibleMixture : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace clsim
