#pragma once

#include <stdexcept>
#include <string>

namespace fermikin
{

/// Broad failure classes. The CLI maps each one to a distinct exit code.
enum class ErrorCategory
{
    Config = 3,     // parse or validation failure in a run configuration
    Numerical = 4,  // contraction loss, iteration limits, unresolved support
    Geometry = 5,   // undefined normals, reflection caps
    Io = 6,         // file access and snapshot shape problems
    Internal = 1,
};

class Error : public std::runtime_error
{
  public:
    Error(ErrorCategory category, std::string const& what)
        : std::runtime_error(what), category_(category)
    {
    }

    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

/// Malformed configuration text (line and key are part of the message).
class ParseError : public Error
{
  public:
    explicit ParseError(std::string const& what) : Error(ErrorCategory::Config, what) {}
};

/// A configuration that parses but violates a named constraint.
class ValidationError : public Error
{
  public:
    ValidationError(std::string constraint, std::string const& what)
        : Error(ErrorCategory::Config, what), constraint_(std::move(constraint))
    {
    }
    std::string const& constraint() const noexcept { return constraint_; }

  private:
    std::string constraint_;
};

class UndefinedNormalError : public Error
{
  public:
    explicit UndefinedNormalError(std::string const& what) : Error(ErrorCategory::Geometry, what)
    {
    }
};

class ReflectionCapError : public Error
{
  public:
    explicit ReflectionCapError(std::string const& what) : Error(ErrorCategory::Geometry, what)
    {
    }
};

class UnresolvedSupportError : public Error
{
  public:
    explicit UnresolvedSupportError(std::string const& what)
        : Error(ErrorCategory::Numerical, what)
    {
    }
};

class SingularGramError : public Error
{
  public:
    explicit SingularGramError(std::string const& what) : Error(ErrorCategory::Numerical, what) {}
};

/// NaN (or other non-admissible) values where a distribution is expected.
class InvalidValueError : public Error
{
  public:
    explicit InvalidValueError(std::string const& what) : Error(ErrorCategory::Numerical, what) {}
};

class NonContractionError : public Error
{
  public:
    explicit NonContractionError(std::string const& what)
        : Error(ErrorCategory::Numerical, what)
    {
    }
};

class MaxIterationError : public Error
{
  public:
    explicit MaxIterationError(std::string const& what) : Error(ErrorCategory::Numerical, what) {}
};

class SupportViolationError : public Error
{
  public:
    explicit SupportViolationError(std::string const& what)
        : Error(ErrorCategory::Numerical, what)
    {
    }
};

class IoError : public Error
{
  public:
    explicit IoError(std::string const& what) : Error(ErrorCategory::Io, what) {}
};

class ShapeMismatchError : public Error
{
  public:
    explicit ShapeMismatchError(std::string const& what) : Error(ErrorCategory::Io, what) {}
};

}  // namespace fermikin
