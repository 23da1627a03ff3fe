#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lisal/error.hpp"
#include "lisal/types.hpp"

namespace lisal::harness {

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : InvalidInput(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Dataset {
  ObservationSet train;
  ObservationSet test;
};

// Header `x,y,t,value,split`, split in {train, test}.
Dataset parse_csv(std::istream& in, const std::string& source = "<stream>");
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const Dataset& data);

// Affine map to zero mean and unit (population) sd of the training values.
struct Standardizer {
  double mean = 0.0;
  double sd = 1.0;

  static Standardizer fit(const Eigen::VectorXd& values);
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  Eigen::VectorXd invert(const Eigen::VectorXd& v) const;
  ObservationSet apply(const ObservationSet& data) const;
};

}  // namespace lisal::harness
