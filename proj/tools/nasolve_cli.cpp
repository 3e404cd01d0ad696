// nasolve: command-line front end for the Newton / Newton-Anderson solvers.
//
//   nasolve solve   --problem chandrasekhar --param c=1 --method agna --rhat 0.5
//   nasolve compare --problem chandrasekhar --param c=1 --method newton --method na --method agna
//   nasolve sweep   --problem bratu1d --sweep lambda:3.0:3.6:0.01 --method newton --method na
//   nasolve verify  safeguard --gamma 0.5 --beta 0.25
//
// Exit codes: 0 success, 1 usage error, 2 every cell failed to converge.

#include "nasolve/diagnostics.hpp"
#include "nasolve/harness.hpp"
#include "nasolve/oracle.hpp"
#include "nasolve/problem.hpp"
#include "nasolve/solver.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace nasolve;

struct SharedOptions
{
  std::string problem = "singular_quadratic";
  std::vector<std::string> params;
  std::vector<std::string> methods;
  std::vector<std::string> variants;
  std::optional<std::size_t> m;
  std::optional<double> r;
  std::optional<double> rhat;
  std::optional<std::string> activation;
  std::optional<double> threshold;
  std::optional<double> switch_m1;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  std::optional<std::string> linesearch;
  std::string x0 = "default";
  std::string sweep;
  bool warm_start = false;
  std::string output;
  std::string format = "csv";
  std::uint64_t seed = 0;
};

void add_shared(CLI::App &cmd, SharedOptions &o, bool multi_config)
{
  cmd.add_option("--problem", o.problem, "singular_quadratic | chandrasekhar | bratu1d");
  cmd.add_option("--param", o.params, "problem parameter k=v (repeatable)");
  if (multi_config) {
    cmd.add_option("--method", o.methods, "newton | na | gna | agna (repeatable)");
    cmd.add_option("--variant", o.variants,
                   "full config as key=value;... e.g. 'method=agna;rhat=0.1' (repeatable)");
  } else {
    cmd.add_option("--method", o.methods, "newton | na | gna | agna")->expected(1);
  }
  cmd.add_option("--m", o.m, "Anderson depth");
  cmd.add_option("--r", o.r, "gamma-safeguarding parameter r in (0,1)");
  cmd.add_option("--rhat", o.rhat, "adaptive safeguarding parameter r_hat in (0,1)");
  cmd.add_option("--activation", o.activation, "always | preasymptotic | asymptotic");
  cmd.add_option("--threshold", o.threshold, "asymptotic activation threshold on ||w||");
  cmd.add_option("--switch-m1", o.switch_m1, "run NA(m) until ||w|| < value, then depth 1");
  cmd.add_option("--tol", o.tol, "residual-norm tolerance");
  cmd.add_option("--max-iter", o.max_iter, "iteration cap");
  cmd.add_option("--linesearch", o.linesearch, "none | armijo");
  cmd.add_option("--x0", o.x0, "zero | ones | default | perturbed:i:v | random:scale");
  cmd.add_option("--output", o.output, "history file (summary goes to <output>.summary.csv)");
  cmd.add_option("--format", o.format, "csv | json");
  cmd.add_option("--seed", o.seed, "seed for randomized initial iterates");
}

SolverConfig base_config(const SharedOptions &o)
{
  SolverConfig cfg;
  auto set = [&cfg](const char *key, const std::string &value) { apply_setting(cfg, key, value); };
  if (o.m)
    cfg.depth = *o.m;
  if (o.r)
    cfg.r = *o.r;
  if (o.rhat)
    cfg.r_hat = *o.rhat;
  if (o.activation)
    set("activation", *o.activation);
  if (o.threshold)
    cfg.activation.threshold = *o.threshold;
  if (o.switch_m1)
    cfg.switch_to_m1_at = *o.switch_m1;
  if (o.tol)
    cfg.tol = *o.tol;
  if (o.max_iter)
    cfg.max_iter = *o.max_iter;
  if (o.linesearch)
    set("linesearch", *o.linesearch);
  return cfg;
}

ExperimentSpec build_spec(const SharedOptions &o, bool default_comparison)
{
  ExperimentSpec spec;
  spec.problem = o.problem;
  for (const std::string &kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--param expects k=v, got '" + kv + "'");
    spec.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  const SolverConfig base = base_config(o);
  for (const std::string &m : o.methods) {
    SolverConfig cfg = base;
    cfg.method = parse_method(m);
    spec.configs.push_back(cfg);
  }
  for (const std::string &v : o.variants)
    spec.configs.push_back(parse_variant(v, base));
  if (spec.configs.empty()) {
    if (default_comparison) {
      for (const char *m : {"newton", "na", "agna"})
        spec.configs.push_back(parse_variant(std::string("method=") + m, base));
    } else {
      spec.configs.push_back(base);
    }
  }
  spec.x0 = parse_initial_iterate(o.x0);
  if (!o.sweep.empty())
    spec.sweep = parse_sweep(o.sweep);
  spec.warm_start = o.warm_start;
  spec.format = parse_format(o.format);
  spec.output_path = o.output;
  spec.seed = o.seed;
  return spec;
}

int run(const SharedOptions &o, bool default_comparison)
{
  const ExperimentSpec spec = build_spec(o, default_comparison);
  const ExperimentResult result = run_experiment(spec);
  if (spec.output_path.empty()) {
    std::cout << result.history;
    std::cerr << result.summary;
  } else {
    write_experiment(spec, result);
    std::cout << result.summary;
  }
  return result.exit_code;
}

std::vector<double> parse_vector(const std::string &s)
{
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(std::stod(item));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Newton, Newton-Anderson and gamma-safeguarded Newton-Anderson solvers"};
  app.require_subcommand(1);

  SharedOptions solve_opts;
  auto *solve_cmd = app.add_subcommand("solve", "run one solver configuration");
  add_shared(*solve_cmd, solve_opts, false);

  SharedOptions compare_opts;
  auto *compare_cmd = app.add_subcommand("compare", "run several configurations on one problem");
  add_shared(*compare_cmd, compare_opts, true);

  SharedOptions sweep_opts;
  auto *sweep_cmd = app.add_subcommand("sweep", "sweep a problem parameter across configurations");
  add_shared(*sweep_cmd, sweep_opts, true);
  sweep_cmd->add_option("--sweep", sweep_opts.sweep, "name:start:end:step")->required();
  sweep_cmd->add_flag("--warm-start", sweep_opts.warm_start,
                      "continue each solve from the previous converged solution");

  auto *verify_cmd = app.add_subcommand("verify", "brute-force reference checks");
  verify_cmd->require_subcommand(1);

  std::string w_next, w_prev;
  double grid_lo = -10.0, grid_hi = 10.0, grid_step = 1e-4;
  auto *v_gamma = verify_cmd->add_subcommand("gamma", "closed-form gamma vs grid search");
  v_gamma->add_option("--wnext", w_next, "comma-separated w_{k+1}")->required();
  v_gamma->add_option("--wprev", w_prev, "comma-separated w_k")->required();
  v_gamma->add_option("--lo", grid_lo);
  v_gamma->add_option("--hi", grid_hi);
  v_gamma->add_option("--step", grid_step);

  double sg_gamma = 0.0, sg_beta = 0.5;
  auto *v_safeguard = verify_cmd->add_subcommand("safeguard", "safeguard lambda vs case oracle");
  v_safeguard->add_option("--gamma", sg_gamma)->required();
  v_safeguard->add_option("--beta", sg_beta)->required();

  std::string jac_problem = "singular_quadratic";
  std::vector<std::string> jac_params;
  std::string jac_x;
  double jac_h = 1e-5;
  auto *v_jacobian = verify_cmd->add_subcommand("jacobian", "analytic vs central-difference Jacobian");
  v_jacobian->add_option("--problem", jac_problem);
  v_jacobian->add_option("--param", jac_params);
  v_jacobian->add_option("--x", jac_x, "comma-separated point (default: built-in x0)");
  v_jacobian->add_option("--step", jac_h, "difference step");

  std::size_t fold_n = 200;
  double fold_start = 3.0, fold_end = 3.6, fold_step = 1e-3;
  auto *v_fold = verify_cmd->add_subcommand("fold", "locate the bratu1d fold by continuation");
  v_fold->add_option("--n", fold_n);
  v_fold->add_option("--start", fold_start);
  v_fold->add_option("--end", fold_end);
  v_fold->add_option("--step", fold_step);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*solve_cmd)
      return run(solve_opts, false);
    if (*compare_cmd)
      return run(compare_opts, true);
    if (*sweep_cmd)
      return run(sweep_opts, true);

    if (*v_gamma) {
      const auto a = parse_vector(w_next);
      const auto b = parse_vector(w_prev);
      if (a.size() != b.size())
        throw std::invalid_argument("--wnext and --wprev differ in length");
      const double closed = anderson_gamma_1(a, b);
      const double grid = oracle::gamma_grid_oracle(a, b, grid_lo, grid_hi, grid_step);
      const bool ok = std::abs(closed - grid) <= grid_step;
      std::printf("closed_form=%s grid=%s %s\n", format_double(closed).c_str(),
                  format_double(grid).c_str(), ok ? "PASS" : "FAIL");
      return ok ? 0 : 2;
    }
    if (*v_safeguard) {
      const double fast = safeguard_decision(sg_gamma, sg_beta).lambda_value;
      const double ref = oracle::safeguard_case_oracle(sg_gamma, sg_beta);
      const bool ok = std::abs(fast - ref) <= 1e-14;
      std::printf("solver=%s oracle=%s %s\n", format_double(fast).c_str(),
                  format_double(ref).c_str(), ok ? "PASS" : "FAIL");
      return ok ? 0 : 2;
    }
    if (*v_jacobian) {
      std::map<std::string, double> params;
      for (const std::string &kv : jac_params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("--param expects k=v");
        params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
      }
      const NonlinearProblem p = make_problem(jac_problem, params);
      const Vector x = jac_x.empty() ? p.default_x0() : parse_vector(jac_x);
      std::printf("max_discrepancy=%s\n", format_double(check_jacobian(p, x, jac_h)).c_str());
      return 0;
    }
    if (*v_fold) {
      const auto fold = oracle::fold_sweep(fold_n, fold_start, fold_end, fold_step);
      std::printf("last_converged=%s\n", fold ? format_double(*fold).c_str() : "none");
      return fold ? 0 : 2;
    }
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
