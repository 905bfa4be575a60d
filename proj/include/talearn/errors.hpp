#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace talearn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A caller-side contract was violated (bad argument, wrong automaton kind, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A learned model does not have the structure of a product of an MDP with a DFA.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Observation sequence has zero probability under the current parameters.
class ImpossibleObservation : public Error {
 public:
  explicit ImpossibleObservation(std::size_t step)
      : Error("impossible observation at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(int iteration)
      : Error("non-finite parameters after iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// Product states observing the same MDP state disagree on its outgoing distribution.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace talearn
