#pragma once

#include <stdexcept>
#include <string>

namespace pivotsmt {

// Broad failure classes; the CLI maps them to exit codes.
enum class ErrorCategory { usage, config, data, internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Invalid UTF-8 input; offset is the byte position of the first bad byte.
class DecodingError : public DataError {
 public:
  DecodingError(const std::string& what, std::size_t offset)
      : DataError(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class SelectionError : public DataError {
 public:
  SelectionError(const std::string& what, std::size_t available)
      : DataError(what), available_(available) {}

  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t available_;
};

class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class ExtractionError : public DataError {
 public:
  using DataError::DataError;
};

class EvaluationError : public DataError {
 public:
  using DataError::DataError;
};

class CombinationError : public DataError {
 public:
  using DataError::DataError;
};

class TuningError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace pivotsmt
