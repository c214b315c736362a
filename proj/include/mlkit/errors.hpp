#pragma once

#include <stdexcept>
#include <string>

namespace mlkit {

// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MLKIT_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

MLKIT_DEFINE_ERROR(ShapeMismatch);
MLKIT_DEFINE_ERROR(NonFiniteInput);
MLKIT_DEFINE_ERROR(DimensionMismatch);
MLKIT_DEFINE_ERROR(IncompatibleDistance);
MLKIT_DEFINE_ERROR(PreconditionError);
MLKIT_DEFINE_ERROR(LabelOutOfRange);
MLKIT_DEFINE_ERROR(DegenerateWeights);
MLKIT_DEFINE_ERROR(ConfigError);
MLKIT_DEFINE_ERROR(KTooLarge);
MLKIT_DEFINE_ERROR(InsufficientNeighbors);
MLKIT_DEFINE_ERROR(LengthMismatch);
MLKIT_DEFINE_ERROR(UnknownMetric);
MLKIT_DEFINE_ERROR(DuplicateName);
MLKIT_DEFINE_ERROR(CorruptCheckpoint);
MLKIT_DEFINE_ERROR(IoFailure);

#undef MLKIT_DEFINE_ERROR

// CSV errors carry the 1-based line they were raised on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  ShapeError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace mlkit
