#pragma once

#include "fdslrm/error.hpp"
#include "fdslrm/estimators.hpp"
#include "fdslrm/model.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace fdslrm::cli {

inline constexpr const char* kReportSchema = "fdslrm-report/1";

enum ExitCode : int { ok = 0, input_error = 2, model_error = 3, degenerate_residual = 4 };

/// parse, length and domain errors are input errors; the rest concern the model.
int exit_code(ErrorCode code);

struct FitRequest {
  ModelSpec spec;
  Eigen::VectorXd series;
  std::vector<std::string> methods{"ne", "nn-doolse", "nn-mdoolse", "mle", "remle", "eblupne"};
  Method initial = Method::remle;
};

struct FitOutcome {
  nlohmann::json report;
  bool degenerate = false;  // some method met eps in span(V)
};

FitOutcome run_fit(const FitRequest& request);

/// Reads a model config; when it has no "n", n is taken from `n_default`.
ModelSpec load_model_for(const std::string& path, long n_default);

/// Entry point behind the fdslrm executable.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fdslrm::cli
