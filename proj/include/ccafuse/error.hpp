#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccafuse {

/// Broad failure class; the CLI maps these onto exit codes.
enum class ErrorCategory { data, numerical };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), category_(category), kind_(std::move(kind)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& kind() const noexcept { return kind_; }
  /// what() without the leading "kind: ".
  std::string detail() const { return std::string(what()).substr(kind_.size() + 2); }

 private:
  ErrorCategory category_;
  std::string kind_;
};

class DataError : public Error {
 public:
  DataError(std::string kind, const std::string& message)
      : Error(ErrorCategory::data, std::move(kind), message) {}
};

class NumericalError : public Error {
 public:
  NumericalError(std::string kind, const std::string& message)
      : Error(ErrorCategory::numerical, std::move(kind), message) {}
};

// Input / data-shape failures.

class InvalidArgument : public DataError {
 public:
  explicit InvalidArgument(const std::string& msg) : DataError("InvalidArgument", msg) {}
};

class ParseError : public DataError {
 public:
  explicit ParseError(const std::string& msg) : DataError("ParseError", msg) {}
};

class ZeroVarianceFeature : public DataError {
 public:
  explicit ZeroVarianceFeature(std::string feature_name)
      : DataError("ZeroVarianceFeature", "feature '" + feature_name + "' is constant"),
        feature(std::move(feature_name)) {}
  std::string feature;
};

class SampleMismatch : public DataError {
 public:
  explicit SampleMismatch(const std::string& msg) : DataError("SampleMismatch", msg) {}
};

class FeatureMismatch : public DataError {
 public:
  explicit FeatureMismatch(std::string first_differing)
      : DataError("FeatureMismatch", "first differing feature: '" + first_differing + "'"),
        feature(std::move(first_differing)) {}
  std::string feature;
};

class DimensionMismatch : public DataError {
 public:
  explicit DimensionMismatch(const std::string& msg) : DataError("DimensionMismatch", msg) {}
};

class NegativeWeight : public DataError {
 public:
  explicit NegativeWeight(const std::string& msg) : DataError("NegativeWeight", msg) {}
};

class TooFewSamples : public DataError {
 public:
  explicit TooFewSamples(const std::string& msg) : DataError("TooFewSamples", msg) {}
};

class ZeroVector : public DataError {
 public:
  explicit ZeroVector(const std::string& msg) : DataError("ZeroVector", msg) {}
};

class ConstantInput : public DataError {
 public:
  explicit ConstantInput(const std::string& msg) : DataError("ConstantInput", msg) {}
};

class SingleClassInput : public DataError {
 public:
  explicit SingleClassInput(const std::string& msg) : DataError("SingleClassInput", msg) {}
};

class SingleClassTraining : public DataError {
 public:
  explicit SingleClassTraining(const std::string& msg) : DataError("SingleClassTraining", msg) {}
};

// Numerical failures.

class NotPositiveDefinite : public NumericalError {
 public:
  explicit NotPositiveDefinite(const std::string& msg) : NumericalError("NotPositiveDefinite", msg) {}
};

class SingularCovariance : public NumericalError {
 public:
  explicit SingularCovariance(const std::string& msg) : NumericalError("SingularCovariance", msg) {}
};

class DegenerateSolution : public NumericalError {
 public:
  explicit DegenerateSolution(const std::string& msg) : NumericalError("DegenerateSolution", msg) {}
};

class ZeroMatrix : public NumericalError {
 public:
  explicit ZeroMatrix(const std::string& msg) : NumericalError("ZeroMatrix", msg) {}
};

class ZeroDenominator : public NumericalError {
 public:
  explicit ZeroDenominator(const std::string& msg) : NumericalError("ZeroDenominator", msg) {}
};

class AllCandidatesFailed : public NumericalError {
 public:
  explicit AllCandidatesFailed(const std::string& msg) : NumericalError("AllCandidatesFailed", msg) {}
};

/// Wraps a solver failure with the deflation component at which it happened.
class ComponentFailure : public Error {
 public:
  ComponentFailure(const Error& cause, std::size_t component)
      : Error(cause.category(), cause.kind(),
              "component " + std::to_string(component) + ": " + cause.detail()),
        component(component) {}
  std::size_t component;
};

/// Prefixes a failure with the pipeline stage that raised it.
class StageFailure : public Error {
 public:
  StageFailure(const Error& cause, std::string stage_name)
      : Error(cause.category(), cause.kind(), stage_name + ": " + cause.detail()), stage(std::move(stage_name)) {}
  std::string stage;
};

}  // namespace ccafuse
