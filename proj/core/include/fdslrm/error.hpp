#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdslrm {

enum class ErrorCode {
  invalid_term,
  invalid_model,
  rank_deficient,
  degenerate_column,
  not_orthogonal,
  domain_error,
  non_positive_definite,
  length_mismatch,
  parse_error,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fdslrm
