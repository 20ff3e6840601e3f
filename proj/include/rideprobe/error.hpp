#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace rideprobe {

/// Base for every failure caused by bad input (files, config, request
/// bodies). The CLI maps these to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public InputError {
 public:
  using InputError::InputError;
};

/// A delimited file lacks a mapped column, or a document lacks a field.
class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

/// Nothing usable was parsed from a source.
class EmptyInputError : public InputError {
 public:
  using InputError::InputError;
};

class GeometryError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class VersionError : public InputError {
 public:
  using InputError::InputError;
};

/// Field-level validation failure; `fields` maps field name to message.
class ValidationError : public InputError {
 public:
  explicit ValidationError(std::map<std::string, std::string> fields);
  ValidationError(const std::string& field, const std::string& message);

  const std::map<std::string, std::string>& fields() const noexcept { return fields_; }

 private:
  std::map<std::string, std::string> fields_;
};

}  // namespace rideprobe
