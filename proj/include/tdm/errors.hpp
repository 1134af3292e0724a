#pragma once

#include <stdexcept>
#include <string>

namespace tdm {

// Base of every library error. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation at a point where a formula diverges (e.g. the 1/beta terms).
class SingularityError : public Error {
 public:
  using Error::Error;
};

// Requested formula does not apply in this parameter regime.
class RegimeError : public Error {
 public:
  using Error::Error;
};

// Iterative search (bracketing, root finding) failed.
class SearchError : public Error {
 public:
  using Error::Error;
};

class DiagonalizationError : public Error {
 public:
  using Error::Error;
};

class EigensolverError : public Error {
 public:
  EigensolverError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class UnsupportedRegimeError : public Error {
 public:
  using Error::Error;
};

// Adaptive step size collapsed during time integration.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Basis or operator bookkeeping inconsistency; indicates a bug.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tdm
