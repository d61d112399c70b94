#pragma once

#include <stdexcept>
#include <string>

namespace sgid {

enum class ErrorCode {
  malformed,
  unknown_vertex,
  duplicate_vertex,
  unknown_edge_kind,
  self_loop,
  duplicate_edge,
  fixed_incoming,
  wrong_graph_class,
  not_block_safe,
  not_fixable,
  unknown_variable,
  positivity,
  mismatch,
  cap_exceeded,
  invalid_argument,
};

const char* to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type;
/// `code()` lets callers branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sgid
