#pragma once

#include <stdexcept>
#include <string>

namespace ffn {

// Exit codes shared with the command-line tool.
enum class ErrorCode : int {
  Usage = 1,
  Parse = 2,
  Precondition = 3,
  Mismatch = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorCode::Parse, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorCode::Precondition, what) {}
};

// Raised when a jet hits a non-generic coincidence (a vanishing coefficient
// combination the branch classification depends on).
class GenericityError : public Error {
 public:
  explicit GenericityError(const std::string& what) : Error(ErrorCode::Precondition, what) {}
};

}  // namespace ffn
