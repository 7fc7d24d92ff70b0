#pragma once

#include <stdexcept>
#include <string>

namespace eivpd {

//! Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A configuration or argument violates a documented precondition.
class InvalidSpec : public Error
{
public:
  using Error::Error;
};

//! |s0| dropped below the trimming floor, so log-derivative ratios are
//! unstable at this frequency.
class DenominatorUnderflow : public Error
{
public:
  DenominatorUnderflow(double denom_mag, double u)
    : Error("ECF denominator underflow: |s0| = " + std::to_string(denom_mag) +
            " at u = " + std::to_string(u))
    , denom_mag_(denom_mag)
    , u_(u)
  {}

  double denom_mag() const { return denom_mag_; }
  double u() const { return u_; }

private:
  double denom_mag_;
  double u_;
};

//! More than half of the quadrature nodes were trimmed.
class GridDegenerate : public Error
{
public:
  using Error::Error;
};

class InsufficientData : public Error
{
public:
  using Error::Error;
};

class SingularDesign : public Error
{
public:
  using Error::Error;
};

class Underidentified : public Error
{
public:
  using Error::Error;
};

class OptimizationFailed : public Error
{
public:
  using Error::Error;
};

class InvalidScaling : public Error
{
public:
  using Error::Error;
};

//! Malformed input file; carries the 1-based line number.
class ParseError : public Error
{
public:
  ParseError(const std::string& what, std::size_t line)
    : Error("line " + std::to_string(line) + ": " + what)
    , line_(line)
  {}

  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

} // namespace eivpd
