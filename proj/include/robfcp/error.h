#ifndef ROBFCP_ERROR_H_
#define ROBFCP_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace robfcp {

enum class ErrorCode {
  kInput,      // precondition or invariant violation on caller data
  kNumerical,  // factorization or other numerical failure
  kParse,      // malformed JSON/CSV/JSONL
  kConfig,     // invalid simulation configuration
  kIo,         // filesystem failure
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCode::kInput, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorCode::kNumerical, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCode::kParse, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace robfcp

#endif  // ROBFCP_ERROR_H_
