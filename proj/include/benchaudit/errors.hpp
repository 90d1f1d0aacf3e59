#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace benchaudit {

// Input and shape problems: malformed files, duplicate keys, incomplete
// tables, bad arguments. The CLI maps these to exit code 2.
enum class ValidationKind {
  MissingColumn,
  DuplicateKey,
  NonNumericValue,
  NegativeError,
  EmptyCube,
  UnknownEfficiencyKind,
  NonPositiveValue,
  NonPositiveInput,
  MetricAbsent,
  MissingCell,
  IncompleteTable,
  IncompleteMatrix,
  IncompleteCube,
  DegenerateShape,
  LengthMismatch,
  OutOfRange,
  UnknownModel,
  TooFewAxes,
  TooShort,
  MissingValue,
  IoFailure,
  MissingEfficiencyKind,
  MissingModel,
  BadArgument,
};

class ValidationError : public std::runtime_error {
public:
  ValidationError(ValidationKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  ValidationKind kind() const noexcept { return kind_; }

private:
  ValidationKind kind_;
};

// Numerical failures on structurally valid input. The CLI maps these to
// exit code 3.
enum class NumericalKind {
  SingularDesign,
  NoMatches,
  AllChannelsConstant,
};

class NumericalError : public std::runtime_error {
public:
  NumericalError(NumericalKind kind, std::string msg)
      : std::runtime_error(std::move(msg)), kind_(kind) {}
  NumericalKind kind() const noexcept { return kind_; }

private:
  NumericalKind kind_;
};

} // namespace benchaudit
