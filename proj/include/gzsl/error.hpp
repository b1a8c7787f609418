#pragma once

#include <stdexcept>
#include <string>

namespace gzsl {

// Every failure surfaced by the library carries one of these codes so
// callers (and the CLI) can distinguish bad files from bad arguments.
enum class Errc {
  invalid_argument,
  dimension_mismatch,
  empty_data,
  label_out_of_range,
  protocol_violation,
  split_too_small,
  config_error,
  io_failure,
  bad_magic,
  bad_version,
  truncated,
  invariant_violation,
};

inline const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::empty_data: return "empty data";
    case Errc::label_out_of_range: return "label out of range";
    case Errc::protocol_violation: return "protocol violation";
    case Errc::split_too_small: return "split too small";
    case Errc::config_error: return "configuration error";
    case Errc::io_failure: return "io failure";
    case Errc::bad_magic: return "bad magic";
    case Errc::bad_version: return "bad version";
    case Errc::truncated: return "truncated payload";
    case Errc::invariant_violation: return "invariant violation";
  }
  return "unknown error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace gzsl
