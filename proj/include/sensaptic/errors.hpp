#pragma once

#include <stdexcept>
#include <string>

namespace sensaptic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data violates a documented shape (non-uniform sampling, bad dt).
class MalformedInputError : public Error {
 public:
  using Error::Error;
};

// Request falls outside the range where a simplified physical model holds.
class OutOfModelError : public Error {
 public:
  using Error::Error;
};

// Geometry query outside the world's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& what)
      : Error(field_path.empty() ? what : field_path + ": " + what),
        path_(std::move(field_path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Wire protocol failures, one class per rejection reason.
class EncodingError : public Error {
 public:
  using Error::Error;
};

class FramingError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class StartupError : public Error {
 public:
  using Error::Error;
};

}  // namespace sensaptic
