#pragma once

#include <stdexcept>
#include <string>

namespace zvl {

enum class Errc {
  invalid_parameter,
  nonzero_mean,
  negative_weight,
  incompatible_spec,
  too_few_records,
  unstable_step,
  coercivity_violation,
  region_out_of_box,
  parse_error,
  validation_error,
  io_error,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::invalid_parameter: return "invalid_parameter";
    case Errc::nonzero_mean: return "nonzero_mean";
    case Errc::negative_weight: return "negative_weight";
    case Errc::incompatible_spec: return "incompatible_spec";
    case Errc::too_few_records: return "too_few_records";
    case Errc::unstable_step: return "unstable_step";
    case Errc::coercivity_violation: return "coercivity_violation";
    case Errc::region_out_of_box: return "region_out_of_box";
    case Errc::parse_error: return "parse_error";
    case Errc::validation_error: return "validation_error";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by the integrators; carries the time at which the step blew up.
class UnstableStep : public Error {
 public:
  UnstableStep(double t, const std::string& what)
      : Error(Errc::unstable_step, what + " at t=" + std::to_string(t)), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(Errc::parse_error, "line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& reason)
      : Error(Errc::validation_error, field + ": " + reason), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace zvl
