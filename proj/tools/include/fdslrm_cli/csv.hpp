#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fdslrm::cli {

/// Splits RFC-4180 text into records. Quoted fields may contain commas,
/// doubled quotes and line breaks; CRLF and LF line ends are accepted.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// First column of a numeric CSV. A header row is recognized by a
/// non-numeric first cell; blank records and records starting with '#'
/// (the simulate metadata line) are skipped.
Eigen::VectorXd read_series(std::istream& in, const std::string& name = "<stream>");
Eigen::VectorXd read_series(const std::filesystem::path& path);

/// Comma-separated doubles, e.g. "1,0.5,2". Throws Error(parse_error).
std::vector<double> parse_number_list(const std::string& text);

std::string quote_csv(const std::string& field);

}  // namespace fdslrm::cli
