#pragma once

#include <stdexcept>
#include <string>

namespace npgraph {

inline constexpr const char* kVersion = "1.0.0";

enum class ErrorCode {
  invalid_argument = 1,  // bad parameters, domain violations, usage
  data_error,            // malformed or out-of-contract input data
  io_error,              // file system failures
  numeric_failure,       // solver breakdown, state corruption
  internal_error,        // should-not-happen conditions
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace npgraph
