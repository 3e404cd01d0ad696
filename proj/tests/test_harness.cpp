#include "doctest.h"

#include "nasolve/harness.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

using namespace nasolve;
using nlohmann::json;

namespace {

std::vector<std::string> lines(const std::string &s)
{
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);)
    out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string &line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos)
      return out;
    start = comma + 1;
  }
}

ConvergenceReport agna_run()
{
  const NonlinearProblem p = make_chandrasekhar(1.0, 40);
  SolverConfig cfg;
  cfg.method = Method::agna;
  return solve(p, p.default_x0(), cfg);
}

ExperimentSpec small_spec()
{
  ExperimentSpec spec;
  spec.problem = "chandrasekhar";
  spec.params = {{"c", 1.0}, {"n", 30}};
  spec.configs = {parse_variant("method=newton"), parse_variant("method=na"),
                  parse_variant("method=agna;rhat=0.5")};
  spec.threads = 2;
  return spec;
}

} // namespace

TEST_CASE("CSV history header and row count")
{
  const ConvergenceReport r = agna_run();
  const auto rows = lines(emit_history(r, OutputFormat::csv));
  REQUIRE(rows.size() == r.iterations + 1);
  CHECK(rows[0] ==
        "k,residual_norm,step_norm,gamma,lambda,eta,r_used,beta,theta,theta_lambda,decision,q");
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(fields(rows[i]).size() == 12);
}

TEST_CASE("Newton rows leave the mixing columns empty")
{
  SolverConfig cfg;
  const ConvergenceReport r = solve(make_singular_quadratic(), Vector{1, 1}, cfg);
  const auto rows = lines(emit_history(r, OutputFormat::csv));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto f = fields(rows[i]);
    for (std::size_t col = 3; col <= 10; ++col)
      CHECK(f[col].empty());
  }
}

TEST_CASE("depth-m gamma is joined with semicolons")
{
  const NonlinearProblem p = make_chandrasekhar(1.0, 20);
  SolverConfig cfg = parse_variant("method=na;m=3");
  const ConvergenceReport r = solve(p, p.default_x0(), cfg);
  const auto rows = lines(emit_history(r, OutputFormat::csv));
  REQUIRE(rows.size() > 4);
  const std::string gamma = fields(rows[4])[3];
  CHECK(std::count(gamma.begin(), gamma.end(), ';') == 2);
}

TEST_CASE("JSON history round-trips every float exactly")
{
  const ConvergenceReport r = agna_run();
  REQUIRE(r.records.size() > 5);
  const json doc = json::parse(emit_history(r, OutputFormat::json));
  CHECK(doc["status"] == "converged");
  CHECK(doc["iterations"].get<std::size_t>() == r.iterations);
  REQUIRE(doc["records"].size() == r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    const auto &rec = r.records[i];
    const json &j = doc["records"][i];
    CHECK(j["k"].get<std::size_t>() == rec.k);
    CHECK(j["residual_norm"].get<double>() == rec.residual_norm);
    CHECK(j["step_norm"].get<double>() == rec.step_norm);
    if (rec.lambda) {
      CHECK(j["lambda"].get<double>() == *rec.lambda);
      CHECK(j["gamma"][0].get<double>() == rec.gamma[0]);
      CHECK(j["eta"].get<double>() == *rec.eta);
      CHECK(j["beta"].get<double>() == *rec.beta);
      CHECK(j["theta"].get<double>() == *rec.theta);
    } else {
      CHECK(j["lambda"].is_null());
      CHECK(j["gamma"].is_null());
    }
  }
  for (std::size_t i = 0; i < r.r_history.size(); ++i)
    CHECK(doc["r_history"][i].get<double>() == r.r_history[i]);
  CHECK(doc["final_residual_norm"].get<double>() == r.final_residual_norm);
}

TEST_CASE("format_double keeps 17 significant digits")
{
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308, 5e-324})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("run_experiment is deterministic")
{
  ExperimentSpec spec = small_spec();
  for (OutputFormat format : {OutputFormat::csv, OutputFormat::json}) {
    spec.format = format;
    const ExperimentResult a = run_experiment(spec);
    spec.threads = 1;
    const ExperimentResult b = run_experiment(spec);
    spec.threads = 2;
    CHECK(a.history == b.history);
    CHECK(a.summary == b.summary);
  }
}

TEST_CASE("random initial iterates depend only on the seed")
{
  const NonlinearProblem p = make_chandrasekhar(0.5, 10);
  const InitialIterate sel = parse_initial_iterate("random:0.1");
  CHECK(make_initial_iterate(p, sel, 42) == make_initial_iterate(p, sel, 42));
  CHECK(make_initial_iterate(p, sel, 42) != make_initial_iterate(p, sel, 43));

  ExperimentSpec spec = small_spec();
  spec.x0 = sel;
  spec.seed = 9;
  CHECK(run_experiment(spec).history == run_experiment(spec).history);
}

TEST_CASE("single config without a sweep yields one history block")
{
  ExperimentSpec spec;
  spec.problem = "singular_quadratic";
  spec.configs = {SolverConfig{}};
  const ExperimentResult r = run_experiment(spec);
  CHECK(r.cells.size() == 1);
  CHECK(std::count(r.history.begin(), r.history.end(), '#') == 1);
  CHECK(r.exit_code == 0);
  CHECK(lines(r.summary).size() == 2);
}

TEST_CASE("summary shows Anderson at least as fast as Newton on chandrasekhar c = 1")
{
  ExperimentSpec spec = small_spec();
  spec.params = {{"c", 1.0}};
  const ExperimentResult r = run_experiment(spec);
  REQUIRE(r.cells.size() == 3);
  const std::size_t newton = r.cells[0].report.iterations;
  CHECK(r.cells[1].report.iterations <= newton);
  CHECK(r.cells[2].report.iterations <= newton);
  const auto rows = lines(r.summary);
  CHECK(rows[0] == "cell,parameter,config,label,status,iterations,q_term,final_residual_norm");
  CHECK(fields(rows[2])[3] == "na(m=1)");
}

TEST_CASE("bratu sweep records onsets and Anderson reaches at least as far")
{
  ExperimentSpec spec;
  spec.problem = "bratu1d";
  spec.params = {{"n", 100}};
  spec.configs = {parse_variant("method=newton"), parse_variant("method=na"),
                  parse_variant("method=agna")};
  spec.sweep = parse_sweep("lambda:3.0:3.6:0.02");
  spec.x0 = parse_initial_iterate("zero");
  const ExperimentResult r = run_experiment(spec);
  REQUIRE(r.onsets.size() == 3);
  REQUIRE(r.onsets[0].last_converged);
  REQUIRE(r.onsets[0].first_failure);
  for (std::size_t c = 1; c < 3; ++c) {
    REQUIRE(r.onsets[c].last_converged);
    CHECK(*r.onsets[c].last_converged >= *r.onsets[0].last_converged);
  }
  CHECK(r.summary.find("config,label,first_failure,last_converged") != std::string::npos);
  CHECK(r.cells.size() == 3 * spec.sweep->values().size());
  for (std::size_t i = 1; i < r.cells.size(); ++i)
    CHECK(*r.cells[i - 1].parameter <= *r.cells[i].parameter);
}

TEST_CASE("exit code 2 when no cell converges")
{
  ExperimentSpec spec;
  spec.problem = "singular_quadratic";
  SolverConfig cfg;
  cfg.max_iter = 2;
  spec.configs = {cfg};
  CHECK(run_experiment(spec).exit_code == 2);
}

TEST_CASE("malformed specs are rejected")
{
  ExperimentSpec spec;
  spec.problem = "singular_quadratic";
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec.configs = {SolverConfig{}};
  spec.sweep = Sweep{"lambda", 1.0, 2.0, 0.0};
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec.problem = "bratu1d";
  spec.sweep = Sweep{"lambda", 1.0, 2.0, 0.5};
  spec.params = {{"bogus", 1.0}};
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);

  spec.problem = "no_such_problem";
  spec.params.clear();
  CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}

TEST_CASE("parsers")
{
  const SolverConfig cfg = parse_variant("method=agna;rhat=0.1,activation=asymptotic;threshold=0.01");
  CHECK(cfg.method == Method::agna);
  CHECK(cfg.r_hat == 0.1);
  CHECK(cfg.activation.kind == Activation::Kind::asymptotic);
  CHECK(cfg.activation.threshold == 0.01);
  CHECK(describe(cfg) == "agna(rhat=0.1;asymptotic(0.01))");
  CHECK(describe(parse_variant("method=gna;r=0.25;linesearch=armijo")) ==
        "gna(r=0.25;always)+armijo");
  CHECK_THROWS_AS(parse_variant("method=na;bogus=1"), ConfigError);
  CHECK_THROWS_AS(parse_variant("method"), ConfigError);
  CHECK_THROWS_AS(parse_variant("m=two"), std::invalid_argument);

  const Sweep s = parse_sweep("lambda:3.0:3.1:0.05");
  CHECK(s.parameter == "lambda");
  CHECK(s.values().size() == 3);
  CHECK_THROWS_AS(parse_sweep("lambda:3.0:3.1"), std::invalid_argument);

  const InitialIterate pert = parse_initial_iterate("perturbed:1:50");
  CHECK(pert.kind == InitialIterate::Kind::perturbed);
  const Vector x = make_initial_iterate(make_singular_quadratic(), pert, 0);
  CHECK(x == Vector{1.0, 50.0});
  CHECK(make_initial_iterate(make_bratu_1d(1, 4), parse_initial_iterate("ones"), 0) == Vector(4, 1.0));
  CHECK_THROWS_AS(parse_initial_iterate("sideways"), std::invalid_argument);
  CHECK_THROWS_AS(make_initial_iterate(make_singular_quadratic(), parse_initial_iterate("perturbed:5:1"), 0),
                  std::invalid_argument);

  CHECK(parse_format("json") == OutputFormat::json);
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}
