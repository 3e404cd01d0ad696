#include "nasolve/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

namespace nasolve {

namespace {

std::vector<std::string_view> split(std::string_view s, std::string_view seps)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || seps.find(s[i]) != std::string_view::npos) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double to_double(std::string_view s, std::string_view what)
{
  // std::from_chars for double is not available on every toolchain we target.
  std::string buf(s);
  char *end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size())
    throw std::invalid_argument("invalid number '" + buf + "' for " + std::string(what));
  return v;
}

std::size_t to_size(std::string_view s, std::string_view what)
{
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw std::invalid_argument("invalid integer '" + std::string(s) + "' for " +
                                std::string(what));
  return v;
}

} // namespace

InitialIterate parse_initial_iterate(std::string_view s)
{
  const auto parts = split(s, ":");
  InitialIterate out;
  if (parts[0] == "zero" && parts.size() == 1) {
    out.kind = InitialIterate::Kind::zero;
  } else if (parts[0] == "ones" && parts.size() == 1) {
    out.kind = InitialIterate::Kind::ones;
  } else if (parts[0] == "default" && parts.size() == 1) {
    out.kind = InitialIterate::Kind::builtin_default;
  } else if (parts[0] == "perturbed" && parts.size() == 3) {
    out.kind = InitialIterate::Kind::perturbed;
    out.index = to_size(parts[1], "perturbed index");
    out.value = to_double(parts[2], "perturbed value");
  } else if (parts[0] == "random" && parts.size() == 2) {
    out.kind = InitialIterate::Kind::random;
    out.value = to_double(parts[1], "random scale");
  } else {
    throw std::invalid_argument("invalid initial iterate '" + std::string(s) + "'");
  }
  return out;
}

Vector make_initial_iterate(const NonlinearProblem &p, const InitialIterate &sel,
                            std::uint64_t seed)
{
  const std::size_t n = p.dimension();
  switch (sel.kind) {
  case InitialIterate::Kind::zero:
    return Vector(n, 0.0);
  case InitialIterate::Kind::ones:
    return Vector(n, 1.0);
  case InitialIterate::Kind::builtin_default:
    return p.default_x0();
  case InitialIterate::Kind::perturbed: {
    if (sel.index >= n)
      throw std::invalid_argument("perturbed index out of range");
    Vector x = p.default_x0();
    x[sel.index] = sel.value;
    return x;
  }
  case InitialIterate::Kind::random: {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector x = p.default_x0();
    for (double &v : x)
      v += sel.value * normal(rng);
    return x;
  }
  }
  return p.default_x0();
}

std::vector<double> Sweep::values() const
{
  std::vector<double> out;
  const double slack = 1e-9 * step;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > end + slack)
      break;
    out.push_back(v);
  }
  return out;
}

Sweep parse_sweep(std::string_view s)
{
  const auto parts = split(s, ":");
  if (parts.size() != 4)
    throw std::invalid_argument("sweep must look like name:start:end:step");
  Sweep out;
  out.parameter = std::string(parts[0]);
  out.start = to_double(parts[1], "sweep start");
  out.end = to_double(parts[2], "sweep end");
  out.step = to_double(parts[3], "sweep step");
  return out;
}

void apply_setting(SolverConfig &cfg, std::string_view key, std::string_view value)
{
  if (key == "method") {
    cfg.method = parse_method(value);
  } else if (key == "m") {
    cfg.depth = to_size(value, key);
  } else if (key == "r") {
    cfg.r = to_double(value, key);
  } else if (key == "rhat") {
    cfg.r_hat = to_double(value, key);
  } else if (key == "activation") {
    if (value == "always")
      cfg.activation.kind = Activation::Kind::always;
    else if (value == "preasymptotic")
      cfg.activation.kind = Activation::Kind::preasymptotic;
    else if (value == "asymptotic")
      cfg.activation.kind = Activation::Kind::asymptotic;
    else
      throw ConfigError("unknown activation '" + std::string(value) + "'");
  } else if (key == "threshold") {
    cfg.activation.threshold = to_double(value, key);
  } else if (key == "switch-m1") {
    cfg.switch_to_m1_at = to_double(value, key);
  } else if (key == "tol") {
    cfg.tol = to_double(value, key);
  } else if (key == "max-iter") {
    cfg.max_iter = to_size(value, key);
  } else if (key == "divergence-cap") {
    cfg.divergence_cap = to_double(value, key);
  } else if (key == "linesearch") {
    if (value == "none")
      cfg.linesearch.reset();
    else if (value == "armijo")
      cfg.linesearch = cfg.linesearch.value_or(ArmijoOptions{});
    else
      throw ConfigError("unknown linesearch '" + std::string(value) + "'");
  } else if (key == "c1" || key == "shrink" || key == "backtracks") {
    ArmijoOptions ls = cfg.linesearch.value_or(ArmijoOptions{});
    if (key == "c1")
      ls.c1 = to_double(value, key);
    else if (key == "shrink")
      ls.shrink = to_double(value, key);
    else
      ls.max_backtracks = static_cast<int>(to_size(value, key));
    cfg.linesearch = ls;
  } else {
    throw ConfigError("unknown solver setting '" + std::string(key) + "'");
  }
}

SolverConfig parse_variant(std::string_view s, SolverConfig base)
{
  for (std::string_view item : split(s, ";,")) {
    if (item.empty())
      continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("variant setting '" + std::string(item) + "' lacks '='");
    apply_setting(base, item.substr(0, eq), item.substr(eq + 1));
  }
  return base;
}

std::string describe(const SolverConfig &cfg)
{
  std::ostringstream os;
  os << to_string(cfg.method);
  switch (cfg.method) {
  case Method::newton:
    break;
  case Method::na:
    os << "(m=" << cfg.depth << ")";
    break;
  case Method::gna:
  case Method::agna:
    os << '(' << (cfg.method == Method::gna ? "r=" : "rhat=")
       << (cfg.method == Method::gna ? cfg.r : cfg.r_hat);
    if (cfg.switch_to_m1_at)
      os << ";m=" << cfg.depth << "->1@" << *cfg.switch_to_m1_at;
    else
      os << ';' << to_string(cfg.activation);
    os << ')';
    break;
  }
  if (cfg.linesearch)
    os << "+armijo";
  return os.str();
}

void ExperimentSpec::validate() const
{
  if (problem.empty())
    throw std::invalid_argument("experiment needs a problem id");
  if (configs.empty())
    throw std::invalid_argument("experiment needs at least one solver config");
  for (const auto &cfg : configs)
    cfg.validate();
  if (sweep) {
    if (!(sweep->step > 0.0))
      throw std::invalid_argument("sweep step must be positive");
    if (sweep->end < sweep->start)
      throw std::invalid_argument("sweep end lies below its start");
    if (sweep->parameter.empty())
      throw std::invalid_argument("sweep needs a parameter name");
  }
}

namespace {

struct Cell
{
  std::optional<double> parameter;
  std::size_t config_index = 0;
  std::size_t problem_index = 0;
};

std::string cell_tag(const ExperimentSpec &spec, const CellResult &cell)
{
  std::ostringstream os;
  os << "problem=" << spec.problem;
  if (cell.parameter)
    os << ' ' << spec.sweep->parameter << '=' << format_double(*cell.parameter);
  os << " config=" << cell.config_index << " label=" << describe(spec.configs[cell.config_index])
     << " status=" << to_string(cell.report.status);
  return os.str();
}

std::string json_escape(std::string_view s)
{
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out;
}

std::string opt_field(const std::optional<double> &v)
{
  return v ? format_double(*v) : std::string();
}

std::string opt_json(const std::optional<double> &v)
{
  return v && std::isfinite(*v) ? format_double(*v) : std::string("null");
}

void serialize(const ExperimentSpec &spec, ExperimentResult &result)
{
  std::ostringstream hist;
  std::ostringstream summary;

  summary << "cell,parameter,config,label,status,iterations,q_term,final_residual_norm\n";
  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    const CellResult &c = result.cells[i];
    summary << i << ',' << opt_field(c.parameter) << ',' << c.config_index << ','
            << describe(spec.configs[c.config_index]) << ',' << to_string(c.report.status) << ','
            << c.report.iterations << ',' << opt_field(c.report.q_term) << ','
            << format_double(c.report.final_residual_norm) << '\n';
  }
  if (spec.sweep) {
    summary << "\nconfig,label,first_failure,last_converged\n";
    for (const Onset &o : result.onsets)
      summary << o.config_index << ',' << describe(spec.configs[o.config_index]) << ','
              << opt_field(o.first_failure) << ',' << opt_field(o.last_converged) << '\n';
  }

  if (spec.format == OutputFormat::csv) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      if (i)
        hist << '\n';
      hist << "# cell=" << i << ' ' << cell_tag(spec, result.cells[i]) << '\n';
      hist << emit_history(result.cells[i].report, OutputFormat::csv);
    }
  } else {
    hist << "{\"problem\":\"" << json_escape(spec.problem) << "\",\"params\":{";
    bool first = true;
    for (const auto &[k, v] : spec.params) {
      hist << (first ? "" : ",") << '"' << json_escape(k) << "\":" << format_double(v);
      first = false;
    }
    hist << "},\"seed\":" << spec.seed << ",\"cells\":[";
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
      const CellResult &c = result.cells[i];
      hist << (i ? "," : "") << "{\"cell\":" << i << ",\"parameter\":";
      if (c.parameter)
        hist << "{\"name\":\"" << json_escape(spec.sweep->parameter)
             << "\",\"value\":" << format_double(*c.parameter) << '}';
      else
        hist << "null";
      hist << ",\"config\":" << c.config_index << ",\"label\":\""
           << json_escape(describe(spec.configs[c.config_index]))
           << "\",\"history\":" << emit_history(c.report, OutputFormat::json) << '}';
    }
    hist << "],\"onsets\":[";
    for (std::size_t i = 0; i < result.onsets.size(); ++i) {
      const Onset &o = result.onsets[i];
      hist << (i ? "," : "") << "{\"config\":" << o.config_index
           << ",\"first_failure\":" << opt_json(o.first_failure)
           << ",\"last_converged\":" << opt_json(o.last_converged) << '}';
    }
    hist << "]}\n";
  }

  result.history = hist.str();
  result.summary = summary.str();
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec &spec)
{
  spec.validate();

  // Build every problem up front so that a bad parameter fails the whole spec.
  std::vector<std::optional<double>> values;
  if (spec.sweep) {
    for (double v : spec.sweep->values())
      values.emplace_back(v);
  } else {
    values.emplace_back(std::nullopt);
  }
  std::vector<NonlinearProblem> problems;
  std::vector<Vector> starts;
  problems.reserve(values.size());
  for (const auto &v : values) {
    auto params = spec.params;
    if (v)
      params[spec.sweep->parameter] = *v;
    problems.push_back(make_problem(spec.problem, params));
    starts.push_back(make_initial_iterate(problems.back(), spec.x0, spec.seed));
  }

  const std::size_t nconfig = spec.configs.size();
  ExperimentResult result;
  result.cells.resize(values.size() * nconfig);
  for (std::size_t pi = 0; pi < values.size(); ++pi) {
    for (std::size_t ci = 0; ci < nconfig; ++ci) {
      CellResult &cell = result.cells[pi * nconfig + ci];
      cell.parameter = values[pi];
      cell.config_index = ci;
    }
  }

  // Cold starts make every cell independent. Warm starts chain the cells of one
  // config along the sweep, so each config becomes a single task.
  auto run_cell = [&](std::size_t pi, std::size_t ci, const Vector &x0) -> const ConvergenceReport & {
    CellResult &cell = result.cells[pi * nconfig + ci];
    cell.report = solve(problems[pi], x0, spec.configs[ci]);
    return cell.report;
  };
  std::vector<std::function<void()>> tasks;
  if (spec.warm_start) {
    for (std::size_t ci = 0; ci < nconfig; ++ci) {
      tasks.emplace_back([&, ci] {
        Vector x0 = starts[0];
        for (std::size_t pi = 0; pi < values.size(); ++pi) {
          const ConvergenceReport &r = run_cell(pi, ci, x0);
          x0 = r.status == SolveStatus::converged ? r.final_x
               : pi + 1 < values.size()          ? starts[pi + 1]
                                                 : x0;
        }
      });
    }
  } else {
    for (std::size_t pi = 0; pi < values.size(); ++pi)
      for (std::size_t ci = 0; ci < nconfig; ++ci)
        tasks.emplace_back([&, pi, ci] { run_cell(pi, ci, starts[pi]); });
  }

  unsigned workers = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++)
      tasks[t]();
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < workers; ++i)
      pool.emplace_back(worker);
  }

  if (spec.sweep) {
    for (std::size_t ci = 0; ci < nconfig; ++ci) {
      Onset o;
      o.config_index = ci;
      for (std::size_t pi = 0; pi < values.size(); ++pi) {
        const auto &cell = result.cells[pi * nconfig + ci];
        if (cell.report.status == SolveStatus::converged)
          o.last_converged = cell.parameter;
        else if (!o.first_failure)
          o.first_failure = cell.parameter;
      }
      result.onsets.push_back(o);
    }
  }

  const bool any_converged =
      std::any_of(result.cells.begin(), result.cells.end(),
                  [](const CellResult &c) { return c.report.status == SolveStatus::converged; });
  result.exit_code = any_converged ? 0 : 2;
  serialize(spec, result);
  return result;
}

void write_experiment(const ExperimentSpec &spec, const ExperimentResult &result)
{
  if (spec.output_path.empty())
    return;
  std::ofstream hist(spec.output_path, std::ios::binary);
  if (!hist)
    throw std::runtime_error("cannot open '" + spec.output_path + "' for writing");
  hist << result.history;
  std::ofstream summary(spec.output_path + ".summary.csv", std::ios::binary);
  if (!summary)
    throw std::runtime_error("cannot open summary file next to '" + spec.output_path + "'");
  summary << result.summary;
}

} // namespace nasolve
