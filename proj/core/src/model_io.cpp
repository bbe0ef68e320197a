#include "fdslrm/model_io.hpp"

#include "fdslrm/error.hpp"

#include <fstream>

namespace fdslrm {

namespace {

using nlohmann::json;

TermSpec term_from_json(const json& t, long n, const std::string& where) {
  if (!t.is_object() || !t.contains("kind") || !t["kind"].is_string())
    throw Error(ErrorCode::parse_error, where + ": term needs a string \"kind\"");
  const auto kind = t["kind"].get<std::string>();
  if (kind == "const") return TermSpec::constant();
  if (kind == "poly") {
    if (!t.contains("power") || !t["power"].is_number_integer())
      throw Error(ErrorCode::parse_error, where + ": poly term needs integer \"power\"");
    return TermSpec::polynomial(t["power"].get<int>());
  }
  if (kind == "cos" || kind == "sin") {
    const bool is_cos = kind == "cos";
    if (t.contains("harmonic")) {
      if (!t["harmonic"].is_number_integer())
        throw Error(ErrorCode::parse_error, where + ": \"harmonic\" must be an integer");
      const long h = t["harmonic"].get<long>();
      return is_cos ? TermSpec::cosine_harmonic(h, n) : TermSpec::sine_harmonic(h, n);
    }
    if (t.contains("frequency")) {
      if (!t["frequency"].is_number())
        throw Error(ErrorCode::parse_error, where + ": \"frequency\" must be a number");
      const double w = t["frequency"].get<double>();
      return is_cos ? TermSpec::cosine(w) : TermSpec::sine(w);
    }
    throw Error(ErrorCode::parse_error, where + ": " + kind + " term needs \"harmonic\"");
  }
  throw Error(ErrorCode::parse_error, where + ": unknown kind \"" + kind + "\"");
}

json term_to_json(const TermSpec& t) {
  switch (t.kind()) {
    case TermKind::constant:
      return {{"kind", "const"}};
    case TermKind::polynomial:
      return {{"kind", "poly"}, {"power", t.power()}};
    case TermKind::cosine:
    case TermKind::sine:
      break;
  }
  json out = {{"kind", t.kind() == TermKind::cosine ? "cos" : "sin"}};
  if (t.harmonic())
    out["harmonic"] = t.harmonic()->index;
  else
    out["frequency"] = t.frequency();
  return out;
}

std::vector<TermSpec> terms_from_json(const json& doc, const char* key, long n) {
  std::vector<TermSpec> terms;
  if (!doc.contains(key)) return terms;
  if (!doc[key].is_array())
    throw Error(ErrorCode::parse_error, std::string("\"") + key + "\" must be an array");
  std::size_t i = 0;
  for (const auto& t : doc[key]) {
    terms.push_back(term_from_json(t, n, std::string(key) + "[" + std::to_string(i) + "]"));
    ++i;
  }
  return terms;
}

}  // namespace

ModelSpec model_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("n") || !doc["n"].is_number_integer())
    throw Error(ErrorCode::parse_error, "model config needs integer \"n\"");
  ModelSpec spec;
  spec.n = doc["n"].get<long>();
  if (spec.n < 1) throw Error(ErrorCode::parse_error, "\"n\" must be positive");
  spec.trend = terms_from_json(doc, "trend", spec.n);
  spec.random = terms_from_json(doc, "random", spec.n);
  spec.validate();
  return spec;
}

json model_to_json(const ModelSpec& spec) {
  json trend = json::array();
  json random = json::array();
  for (const auto& t : spec.trend) trend.push_back(term_to_json(t));
  for (const auto& t : spec.random) random.push_back(term_to_json(t));
  return {{"n", spec.n}, {"trend", trend}, {"random", random}};
}

ModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace fdslrm
