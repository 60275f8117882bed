#pragma once

#include <stdexcept>
#include <string>

namespace netkoop {

enum class ErrorKind {
  Argument,    // bad shapes, out-of-range parameters
  Validation,  // config or file contents fail a schema/consistency check
  Parse,       // malformed text or CSV
  Numerical,   // SVD failure, overflow, non-principal spectrum, divergence
  Scoring,     // truth and estimate cannot be aligned
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& what) : Error(ErrorKind::Argument, what) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

// Raised by the principal logarithm when an eigenvalue sits on or near the
// closed negative real axis.
struct NonPrincipalSpectrum : NumericalError {
  NonPrincipalSpectrum(const std::string& what, double re, double im)
      : NumericalError(what), eig_re(re), eig_im(im) {}
  double eig_re;
  double eig_im;
};

struct DivergenceError : NumericalError {
  DivergenceError(const std::string& what, double t) : NumericalError(what), time(t) {}
  double time;
};

struct ScoringError : Error {
  explicit ScoringError(const std::string& what) : Error(ErrorKind::Scoring, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace netkoop
