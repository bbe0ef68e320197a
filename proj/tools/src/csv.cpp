#include "fdslrm_cli/csv.hpp"

#include "fdslrm/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace fdslrm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_double(const std::string& cell) {
  const std::string s = trim(cell);
  if (s.empty()) return std::nullopt;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;  // current record has content
  const auto end_record = [&] {
    if (any || !field.empty()) record.push_back(std::move(field));
    if (!record.empty()) records.push_back(std::move(record));
    record.clear();
    field.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        any = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field += c;
        any = true;
    }
  }
  if (quoted) throw Error(ErrorCode::parse_error, "unterminated quoted CSV field");
  end_record();
  return records;
}

Eigen::VectorXd read_series(std::istream& in, const std::string& name) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto records = parse_csv(buf.str());
  std::vector<double> values;
  bool first = true;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const std::string& cell = records[r].front();
    if (records[r].size() == 1 && trim(cell).empty()) continue;
    if (!cell.empty() && cell.front() == '#') continue;  // metadata comment
    const auto v = to_double(cell);
    const bool header_slot = first;
    first = false;
    if (!v) {
      if (header_slot) continue;  // header
      throw Error(ErrorCode::parse_error,
                  name + ": record " + std::to_string(r + 1) + ": \"" + cell + "\" is not a number");
    }
    values.push_back(*v);
  }
  if (values.empty()) throw Error(ErrorCode::parse_error, name + ": no numeric observations");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<long>(values.size()));
}

Eigen::VectorXd read_series(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open data file " + path.string());
  return read_series(in, path.string());
}

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(item);
    if (!v) throw Error(ErrorCode::parse_error, "\"" + item + "\" is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw Error(ErrorCode::parse_error, "empty number list");
  return out;
}

std::string quote_csv(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace fdslrm::cli
