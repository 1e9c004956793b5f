#pragma once

#include <stdexcept>
#include <string>

namespace sarslide {

/// Coarse error category. Maps one-to-one onto CLI exit codes.
enum class ErrorKind {
  config = 2,
  data = 3,
  training = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message)
      : Error(ErrorKind::config, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::data, message) {}
};

/// Malformed or corrupt on-disk artifact (chip, checkpoint, manifest).
class FormatError : public DataError {
 public:
  explicit FormatError(const std::string& message) : DataError(message) {}
};

class TrainingError : public Error {
 public:
  explicit TrainingError(const std::string& message)
      : Error(ErrorKind::training, message) {}
};

const char* error_code_name(ErrorKind kind) noexcept;

}  // namespace sarslide
