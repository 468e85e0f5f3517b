#pragma once

#include <stdexcept>
#include <string>

namespace hlsforge {

enum class ErrorKind {
  kInvalidArgument,
  kData,        // malformed or out-of-range input data
  kSchema,      // schema declaration violates an invariant
  kOverflow,    // value outside the representable fixed-point range
  kShape,       // tensor or matrix dimensions disagree
  kDivergence,  // non-finite value during training
  kIo,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hlsforge
