#pragma once

#include <stdexcept>
#include <string>

namespace lisal {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Covariance factorization failed even after the largest permitted jitter.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double attempted_jitter)
      : Error(what), attempted_jitter_(attempted_jitter) {}
  double attempted_jitter() const { return attempted_jitter_; }

 private:
  double attempted_jitter_;
};

class OptimizationFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace lisal
