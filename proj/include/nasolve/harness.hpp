#ifndef NASOLVE_HARNESS_HPP
#define NASOLVE_HARNESS_HPP

#include "nasolve/problem.hpp"
#include "nasolve/report.hpp"
#include "nasolve/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nasolve {

enum class OutputFormat
{
  csv,
  json,
};

OutputFormat parse_format(std::string_view s);

/// Column order of a CSV history. JSON records use the same names.
inline constexpr const char *kHistoryColumns[] = {
    "k",    "residual_norm", "step_norm", "gamma",        "lambda",   "eta",
    "r_used", "beta",        "theta",     "theta_lambda", "decision", "q"};

/// Serializes one report. Floats carry 17 significant digits; missing values
/// are empty CSV fields or JSON nulls. A multi-column gamma is joined by ';'
/// in CSV and written as an array in JSON.
std::string emit_history(const ConvergenceReport &report, OutputFormat format);

/// "%.17g" formatting shared by every emitted float.
std::string format_double(double v);

struct InitialIterate
{
  enum class Kind
  {
    zero,
    ones,
    builtin_default,
    perturbed, // builtin default with entry `index` replaced by `value`
    random,    // builtin default plus `value` * N(0, 1) noise drawn from the seed
  };
  Kind kind = Kind::builtin_default;
  std::size_t index = 0;
  double value = 0.0;
};

/// Parses "zero", "ones", "default", "perturbed:<index>:<value>" or
/// "random:<scale>".
InitialIterate parse_initial_iterate(std::string_view s);

Vector make_initial_iterate(const NonlinearProblem &p, const InitialIterate &sel,
                            std::uint64_t seed);

struct Sweep
{
  std::string parameter;
  double start = 0.0;
  double end = 0.0;
  double step = 0.0;

  std::vector<double> values() const;
};

/// Parses "<name>:<start>:<end>:<step>".
Sweep parse_sweep(std::string_view s);

/// Applies one "key=value" setting to a config. Keys mirror the CLI flags:
/// method, m, r, rhat, activation, threshold, switch-m1, tol, max-iter,
/// divergence-cap, linesearch (none|armijo), c1, shrink, backtracks.
void apply_setting(SolverConfig &cfg, std::string_view key, std::string_view value);

/// Parses a ';'- or ','-separated list of key=value settings on top of `base`.
SolverConfig parse_variant(std::string_view s, SolverConfig base = {});

/// Short human-readable tag, e.g. "agna(rhat=0.5;always)".
std::string describe(const SolverConfig &cfg);

struct ExperimentSpec
{
  std::string problem;
  std::map<std::string, double> params;
  std::vector<SolverConfig> configs;
  InitialIterate x0;
  std::optional<Sweep> sweep;
  bool warm_start = false; // continue each config from its previous converged solution
  OutputFormat format = OutputFormat::csv;
  std::string output_path; // empty: caller decides where output goes
  std::uint64_t seed = 0;
  unsigned threads = 0; // 0: hardware concurrency

  /// Throws std::invalid_argument for a malformed spec.
  void validate() const;
};

struct CellResult
{
  std::optional<double> parameter;
  std::size_t config_index = 0;
  ConvergenceReport report;
};

struct Onset
{
  std::size_t config_index = 0;
  std::optional<double> first_failure;  // smallest swept value that did not converge
  std::optional<double> last_converged; // largest swept value that converged
};

struct ExperimentResult
{
  std::vector<CellResult> cells; // ordered by (parameter value, config index)
  std::vector<Onset> onsets;     // one per config when a sweep is present
  std::string history;           // serialized history blocks
  std::string summary;           // CSV summary table(s)
  int exit_code = 0;             // 0 ok, 2 when no cell converged
};

/// Runs every (parameter value x config) cell and serializes the results.
/// Output is a pure function of the spec. Throws std::invalid_argument for a
/// malformed spec.
ExperimentResult run_experiment(const ExperimentSpec &spec);

/// Writes history to spec.output_path and the summary next to it
/// (<output_path>.summary.csv). No-op for an empty output path.
void write_experiment(const ExperimentSpec &spec, const ExperimentResult &result);

} // namespace nasolve

#endif
