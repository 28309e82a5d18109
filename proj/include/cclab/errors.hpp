#pragma once

#include <stdexcept>
#include <string>

namespace cclab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition or invariant.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A matrix lacks inter-cluster common influence where it is required.
class CommonInfluenceError : public Error {
 public:
  using Error::Error;
};

/// An iterative limit did not settle within its iteration budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A generator could not realize the requested structure.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A belief left [0, 1] beyond the monitored slack.
class BeliefRangeError : public Error {
 public:
  BeliefRangeError(const std::string& what, double strength, std::size_t time)
      : Error(what), strength_(strength), time_(time) {}
  double strength() const { return strength_; }
  std::size_t time() const { return time_; }

 private:
  double strength_;
  std::size_t time_;
};

}  // namespace cclab
