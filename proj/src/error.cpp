#include "divrec/error.hpp"

namespace divrec {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::hypothesis_violated: return "hypothesis_violated";
    case ErrorCode::no_closed_form: return "no_closed_form";
    case ErrorCode::unidentifiable: return "unidentifiable";
    case ErrorCode::coverage: return "coverage";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace divrec
