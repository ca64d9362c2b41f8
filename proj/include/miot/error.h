#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace miot {

enum class Severity { Error, Warning };

/// One validation finding. A missing expectation_id marks a whole-document finding.
struct Finding {
  std::optional<int> expectation_id;
  Severity severity = Severity::Error;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class InvalidDevice : public Error {
 public:
  using Error::Error;
};

class OutOfScope : public Error {
 public:
  using Error::Error;
};

class CatalogMismatch : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DowngradeRejected : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

class TooFewAxes : public Error {
 public:
  using Error::Error;
};

/// Carries the findings that caused the failure.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::vector<Finding> findings)
      : Error(what), findings_(std::move(findings)) {}
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  std::vector<Finding> findings_;
};

class IncompleteAssessment : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace miot
