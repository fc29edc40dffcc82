#pragma once

#include <stdexcept>
#include <string>

namespace layerheat {

enum class ErrorCode {
  invalid_argument = 1,
  geometry = 2,
  parse = 3,
  io = 4,
  convergence = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::invalid_argument, what);
}

}  // namespace layerheat
