#ifndef WAVEDEFORM_ERROR_HPP
#define WAVEDEFORM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace wavedeform {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong in wavedeform" can catch this one.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (x outside [0,1],
// negative distance, non-positive range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class FamilyHasNoFather : public Error {
 public:
  FamilyHasNoFather() : Error("Mexican hat family has no father function") {}
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DegenerateSeries : public Error {
 public:
  using Error::Error;
};

// Errors raised while reading external data. `line` is 1-based, 0 if unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MalformedLine : public DataError {
 public:
  using DataError::DataError;
};

class TruncatedRecord : public DataError {
 public:
  using DataError::DataError;
};

class EmptySelection : public DataError {
 public:
  using DataError::DataError;
};

class InconsistentLength : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace wavedeform

#endif  // WAVEDEFORM_ERROR_HPP
