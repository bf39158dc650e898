#pragma once

#include <stdexcept>
#include <string>

namespace anovasvm {

enum class ErrorCode {
  invalid_argument,
  not_found,
  domain_error,
  index_error,
  parse_error,
  numeric_failure,
  step_failure,
  format_error,
  config_error,
  io_error,
};

const char* error_code_name(ErrorCode code) noexcept;

/// Base exception of the library. Every failure surfaced by the core carries
/// one of the codes above; the C API maps them 1:1 onto status values.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace anovasvm
