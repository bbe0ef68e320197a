#include "fdslrm_cli/commands.hpp"

#include "fdslrm/eblupne.hpp"
#include "fdslrm/mme.hpp"
#include "fdslrm/model_io.hpp"
#include "fdslrm/periodogram.hpp"
#include "fdslrm/projection.hpp"
#include "fdslrm/simulate.hpp"
#include "fdslrm_cli/bench.hpp"
#include "fdslrm_cli/csv.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace fdslrm::cli {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json to_json(const VectorXd& v) {
  json a = json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json pattern_json(const ActivePattern& b) {
  json a = json::array();
  for (bool bj : b) a.push_back(bj ? 1 : 0);
  return a;
}

json result_json(const EstimationResult& r) {
  json j;
  j["method"] = std::string(r.label());
  j["estimate"] = to_json(r.estimate);
  j["norm"] = r.estimate.norm();
  j["flags"] = {{"has_negative", r.has_negative}, {"degenerate_residual", r.degenerate_residual}};
  if (r.kkt) {
    j["diagnostics"] = {{"active_pattern", pattern_json(r.kkt->active_pattern)},
                        {"systems_tried", r.kkt->systems_tried},
                        {"lagrange", to_json(r.kkt->lagrange)},
                        {"boundary_tie", r.kkt->boundary_tie},
                        {"fallback", r.kkt->fallback}};
  }
  if (r.loglik) j["loglik"] = *r.loglik;
  return j;
}

template <class F>
auto timed(F&& f, long long& ns) {
  const auto t0 = std::chrono::steady_clock::now();
  auto value = f();
  ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
           .count();
  return value;
}

// Writes to `path`, or to `out` when path is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& out) {
    if (path.empty() || path == "-") {
      stream_ = &out;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw Error(ErrorCode::parse_error, "cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  if (out.empty()) throw Error(ErrorCode::parse_error, "no methods given");
  return out;
}

std::vector<long> parse_long_list(const std::string& s) {
  std::vector<long> out;
  for (double v : parse_number_list(s)) {
    if (v < 1 || v != std::floor(v) || v > 1e12)
      throw Error(ErrorCode::parse_error, "\"" + fmt(v) + "\" is not a positive integer");
    out.push_back(static_cast<long>(v));
  }
  return out;
}

std::uint64_t effective_seed(std::uint64_t seed) {
  if (const char* env = std::getenv("FDSLRM_SEED"); env && *env) {
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end)
      throw Error(ErrorCode::parse_error, std::string("FDSLRM_SEED is not an integer: ") + env);
    return v;
  }
  return seed;
}

VarianceComponents parse_nu(const std::string& text) {
  const auto v = parse_number_list(text);
  return VarianceComponents(Eigen::Map<const VectorXd>(v.data(), static_cast<long>(v.size())));
}

int cmd_fit(const std::string& data, const std::string& model, const std::string& methods,
            const std::string& initial, const std::string& output, bool strict, std::ostream& out,
            std::ostream& err) {
  FitRequest req;
  req.series = read_series(data);
  req.spec = load_model_for(model, req.series.size());
  req.methods = split_names(methods);
  req.initial = parse_method(initial);
  const FitOutcome outcome = run_fit(req);
  Sink sink(output, out);
  *sink << outcome.report.dump(2) << '\n';
  if (outcome.degenerate) {
    err << "warning: the OLS residual lies in span(V); nu_0 is estimated as 0 and the "
           "likelihood maximum does not exist\n";
    if (strict) return ExitCode::degenerate_residual;
  }
  return ExitCode::ok;
}

int cmd_predict(const std::string& data, const std::string& model, const std::string& nu_text,
                const std::string& method, const std::string& output, std::ostream& out) {
  const VectorXd x = read_series(data);
  const ModelSpec spec = load_model_for(model, x.size());
  const DesignSet design = realize(spec);
  VarianceComponents nu = VarianceComponents::white_noise(1.0, 0);
  if (!nu_text.empty()) {
    nu = parse_nu(nu_text);
  } else {
    nu = estimate(parse_method(method), build_projection(design, x), design).components();
  }
  const BlupResult blup = solve_mme(design, x, nu);
  const VectorXd trend = design.F() * blup.beta_hat;
  const VectorXd signal = design.V() * blup.y_hat;

  Sink sink(output, out);
  *sink << "t,x,trend,signal,residual,beta,y_hat\n";
  for (long t = 0; t < design.n(); ++t) {
    *sink << t + 1 << ',' << fmt(x(t)) << ',' << fmt(trend(t)) << ',' << fmt(signal(t)) << ','
          << fmt(blup.conditional_residuals(t)) << ',';
    if (t < design.k()) *sink << fmt(blup.beta_hat(t));
    *sink << ',';
    if (t < design.l()) *sink << fmt(blup.y_hat(t));
    *sink << '\n';
  }
  return ExitCode::ok;
}

int cmd_simulate(const std::string& model, const std::string& beta_text, const std::string& nu_text,
                 long replicates, std::uint64_t seed, bool summary, const std::string& output,
                 std::ostream& out) {
  SimulationConfig cfg;
  cfg.spec = load_model_for(model, -1);
  if (beta_text.empty()) {
    cfg.beta = VectorXd::Zero(cfg.spec.k());
  } else {
    const auto b = parse_number_list(beta_text);
    cfg.beta = Eigen::Map<const VectorXd>(b.data(), static_cast<long>(b.size()));
  }
  cfg.nu_true = parse_nu(nu_text);
  cfg.replicates = replicates;
  cfg.seed = effective_seed(seed);
  const GaussianSampler sampler(cfg);
  const long n = sampler.design().n();
  Sink sink(output, out);

  if (summary) {
    // Welford running moments per time point.
    VectorXd mean = VectorXd::Zero(n);
    VectorXd m2 = VectorXd::Zero(n);
    for (long r = 0; r < sampler.size(); ++r) {
      const VectorXd x = sampler.draw(r).x;
      const VectorXd delta = x - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta.cwiseProduct(x - mean);
    }
    const VectorXd var =
        sampler.size() > 1 ? VectorXd(m2 / static_cast<double>(sampler.size() - 1)) : VectorXd::Zero(n);
    json doc = {{"schema", "fdslrm-simulation/1"},
                {"algorithm", std::string(GaussianSampler::algorithm)},
                {"seed", cfg.seed},
                {"replicates", cfg.replicates},
                {"model", model_to_json(cfg.spec)},
                {"beta", to_json(cfg.beta)},
                {"nu", to_json(cfg.nu_true.values())},
                {"mean", to_json(mean)},
                {"variance", to_json(var)}};
    *sink << doc.dump(2) << '\n';
    return ExitCode::ok;
  }

  MatrixXd cols(n, sampler.size());
  for (long r = 0; r < sampler.size(); ++r) cols.col(r) = sampler.draw(r).x;
  *sink << "# algorithm=" << GaussianSampler::algorithm << " seed=" << cfg.seed << '\n';
  for (long r = 0; r < sampler.size(); ++r) *sink << (r ? "," : "") << "x" << r;
  *sink << '\n';
  for (long t = 0; t < n; ++t) {
    for (long r = 0; r < sampler.size(); ++r) *sink << (r ? "," : "") << fmt(cols(t, r));
    *sink << '\n';
  }
  return ExitCode::ok;
}

int cmd_bench(const std::string& n_grid, const std::string& l_grid, std::uint64_t seed, int runs,
              bool as_json, std::ostream& out) {
  BenchOptions opt;
  opt.n_grid = parse_long_list(n_grid);
  opt.l_grid = parse_long_list(l_grid);
  opt.seed = effective_seed(seed);
  opt.runs = runs;
  const auto points = bench_nn_mdoolse(opt);

  json doc = {{"schema", "fdslrm-bench/1"}, {"seed", opt.seed}, {"runs", opt.runs}};
  doc["points"] = json::array();
  doc["slopes"] = json::array();
  if (!as_json) out << std::setw(4) << "l" << std::setw(12) << "n" << std::setw(16) << "median_ns"
                    << std::setw(10) << "batch" << '\n';
  for (long l : opt.l_grid) {
    std::vector<BenchPoint> row;
    for (const auto& p : points)
      if (p.l == l) row.push_back(p);
    for (const auto& p : row) {
      doc["points"].push_back({{"n", p.n}, {"l", p.l}, {"median_ns", p.median_ns},
                               {"runs", p.runs}, {"batch", p.batch}});
      if (!as_json)
        out << std::setw(4) << p.l << std::setw(12) << p.n << std::setw(16) << std::fixed
            << std::setprecision(0) << p.median_ns << std::setw(10) << p.batch << '\n';
    }
    const double slope = loglog_slope(row);
    doc["slopes"].push_back({{"l", l}, {"slope", slope}, {"ratio_per_doubling", std::exp2(slope)}});
    if (!as_json && row.size() > 1)
      out << "l=" << l << " slope " << std::setprecision(3) << slope << ", time ratio per doubling "
          << std::exp2(slope) << '\n';
  }
  if (as_json) out << doc.dump(2) << '\n';
  return ExitCode::ok;
}

int cmd_periodogram(const std::string& data, bool sort, long top, const std::string& output,
                    std::ostream& out) {
  const VectorXd x = read_series(data);
  const auto ords = periodogram(x, sort);
  Sink sink(output, out);
  *sink << "harmonic,frequency,power\n";
  long count = 0;
  for (const auto& o : ords) {
    if (top > 0 && count++ >= top) break;
    *sink << o.harmonic << ',' << fmt(o.frequency) << ',' << fmt(o.power) << '\n';
  }
  return ExitCode::ok;
}

}  // namespace

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::parse_error:
    case ErrorCode::length_mismatch:
    case ErrorCode::domain_error:
      return ExitCode::input_error;
    default:
      return ExitCode::model_error;
  }
}

ModelSpec load_model_for(const std::string& path, long n_default) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  if (doc.is_object() && !doc.contains("n") && n_default > 0) doc["n"] = n_default;
  return model_from_json(doc);
}

FitOutcome run_fit(const FitRequest& request) {
  const DesignSet design = realize(request.spec);
  FitOutcome outcome;
  json& report = outcome.report;
  report["schema"] = kReportSchema;
  report["model"] = model_to_json(request.spec);
  report["orthogonal"] = design.is_orthogonal();
  report["results"] = json::array();

  for (const auto& name : request.methods) {
    long long ns = 0;
    json entry;
    if (name == "eblupne") {
      const EblupNeResult r =
          timed([&] { return eblup_ne(design, request.series, request.initial); }, ns);
      entry["method"] = "eblupne";
      entry["initial"] = result_json(r.initial);
      entry["estimate"] = to_json(r.final.values());
      entry["norm"] = r.final.norm();
      entry["rho"] = to_json(r.rho);
      entry["flags"] = {{"zero_noise_limit", r.zero_noise_limit},
                        {"degenerate_residual", r.initial.degenerate_residual}};
      outcome.degenerate = outcome.degenerate || r.initial.degenerate_residual;
    } else {
      const Method m = parse_method(name);
      const EstimationResult r = timed(
          [&] { return estimate(m, build_projection(design, request.series), design); }, ns);
      entry = result_json(r);
      outcome.degenerate = outcome.degenerate || r.degenerate_residual;
    }
    entry["time_ns"] = ns;
    report["results"].push_back(std::move(entry));
  }
  return outcome;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance components and EBLUP in finite discrete spectrum linear regression models"};
  app.require_subcommand(1);

  std::string data, model, output, methods = "ne,nn-doolse,nn-mdoolse,mle,remle,eblupne";
  std::string initial = "remle", nu_text, method = "remle", beta_text;
  std::string n_grid = "1e3,1e4,1e5,1e6", l_grid = "4";
  bool strict = false, summary = false, sort = false, as_json = false;
  long replicates = 1, top = 0;
  std::uint64_t seed = 0;
  int runs = 11;

  auto* fit = app.add_subcommand("fit", "Estimate variance components");
  fit->add_option("data", data, "Series CSV (first column)")->required();
  fit->add_option("model", model, "Model config JSON")->required();
  fit->add_option("--methods", methods, "Comma-separated: ne, proj-doolse, proj-mdoolse, "
                                        "nn-doolse (doolse), nn-mdoolse (mdoolse), mle, remle, eblupne");
  fit->add_option("--initial", initial, "Stage-1 method for eblupne");
  fit->add_option("-o,--output", output, "Report path (default stdout)");
  fit->add_flag("--strict", strict, "Exit with 4 when the residual lies in span(V)");

  auto* predict = app.add_subcommand("predict", "BLUE/BLUP decomposition from the mixed model equations");
  predict->add_option("data", data, "Series CSV")->required();
  predict->add_option("model", model, "Model config JSON")->required();
  predict->add_option("--nu", nu_text, "Variance components nu_0,...,nu_l");
  predict->add_option("--method", method, "Estimate nu with this method when --nu is absent");
  predict->add_option("-o,--output", output, "CSV path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "Draw Gaussian replicates");
  simulate->add_option("model", model, "Model config JSON")->required();
  simulate->add_option("--nu", nu_text, "True nu_0,...,nu_l")->required();
  simulate->add_option("--beta", beta_text, "Trend coefficients (default 0)");
  simulate->add_option("--replicates", replicates, "Number of replicates");
  simulate->add_option("--seed", seed, "Seed; FDSLRM_SEED overrides");
  simulate->add_flag("--summary", summary, "Write per-time mean and variance as JSON");
  simulate->add_option("-o,--output", output, "Output path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Time NN-MDOOLSE over a grid of n");
  bench->add_option("--n-grid", n_grid, "Ascending list of n");
  bench->add_option("--l", l_grid, "Number of random components (list allowed)");
  bench->add_option("--seed", seed, "Seed; FDSLRM_SEED overrides");
  bench->add_option("--runs", runs, "Timed runs per point (median reported)")
      ->check(CLI::Range(1, 1000000));
  bench->add_flag("--json", as_json, "JSON output");

  auto* pgram = app.add_subcommand("periodogram", "Periodogram at the Fourier frequencies");
  pgram->add_option("data", data, "Series CSV")->required();
  pgram->add_flag("--sort", sort, "Sort by descending power");
  pgram->add_option("--top", top, "Keep the first N ordinates");
  pgram->add_option("-o,--output", output, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::input_error;
  }

  try {
    if (fit->parsed()) return cmd_fit(data, model, methods, initial, output, strict, out, err);
    if (predict->parsed()) return cmd_predict(data, model, nu_text, method, output, out);
    if (simulate->parsed())
      return cmd_simulate(model, beta_text, nu_text, replicates, seed, summary, output, out);
    if (bench->parsed()) return cmd_bench(n_grid, l_grid, seed, runs, as_json, out);
    if (pgram->parsed()) return cmd_periodogram(data, sort, top, output, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return ExitCode::input_error;
  }
  return ExitCode::input_error;
}

}  // namespace fdslrm::cli
