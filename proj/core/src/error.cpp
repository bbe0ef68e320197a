#include "fdslrm/error.hpp"

namespace fdslrm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_term: return "InvalidTerm";
    case ErrorCode::invalid_model: return "InvalidModel";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::degenerate_column: return "DegenerateColumn";
    case ErrorCode::not_orthogonal: return "NotOrthogonal";
    case ErrorCode::domain_error: return "DomainError";
    case ErrorCode::non_positive_definite: return "NonPositiveDefinite";
    case ErrorCode::length_mismatch: return "LengthMismatch";
    case ErrorCode::parse_error: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace fdslrm
