#pragma once

#include <stdexcept>
#include <string>

namespace divrec {

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  budget_exceeded,
  hypothesis_violated,
  no_closed_form,
  unidentifiable,
  coverage,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Every library failure is reported through this type; the CLI maps the code
// to its exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace divrec
