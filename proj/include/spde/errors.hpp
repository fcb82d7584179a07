#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spde {

enum class ErrorKind {
  InvalidParams,
  InvalidNoise,
  BlockAtOrigin,
  WhiteNoisePointwise,
  Divergent,
  ConvergenceFailure,
  NotLocalRegime,
  CriticalOrSupercritical,
  ExponentDomain,
  OracleDomain,
  OutsideConvergence,
  NotMonotone,
  InsufficientTerms,
  BudgetExceeded,
  OptimizerStalled,
};

constexpr std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidNoise: return "InvalidNoise";
    case ErrorKind::BlockAtOrigin: return "BlockAtOrigin";
    case ErrorKind::WhiteNoisePointwise: return "WhiteNoisePointwise";
    case ErrorKind::Divergent: return "Divergent";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::NotLocalRegime: return "NotLocalRegime";
    case ErrorKind::CriticalOrSupercritical: return "CriticalOrSupercritical";
    case ErrorKind::ExponentDomain: return "ExponentDomain";
    case ErrorKind::OracleDomain: return "OracleDomain";
    case ErrorKind::OutsideConvergence: return "OutsideConvergence";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::InsufficientTerms: return "InsufficientTerms";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::OptimizerStalled: return "OptimizerStalled";
  }
  return "Unknown";
}

// Bad input versus a computation that could not be completed.
constexpr bool is_input_error(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidNoise:
    case ErrorKind::BlockAtOrigin:
    case ErrorKind::WhiteNoisePointwise:
    case ErrorKind::NotLocalRegime:
    case ErrorKind::CriticalOrSupercritical:
    case ErrorKind::ExponentDomain:
    case ErrorKind::OracleDomain:
    case ErrorKind::NotMonotone:
    case ErrorKind::InsufficientTerms:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) throw Error(kind, what);
}

}  // namespace spde
