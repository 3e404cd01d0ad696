#ifndef NASOLVE_SOLVER_HPP
#define NASOLVE_SOLVER_HPP

#include "nasolve/linalg.hpp"
#include "nasolve/problem.hpp"
#include "nasolve/report.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace nasolve {

enum class Method
{
  newton,
  na,   // Newton-Anderson(m)
  gna,  // gamma-safeguarded Newton-Anderson, fixed r
  agna, // adaptive gamma-safeguarded Newton-Anderson
};

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

/// When safeguarding is applied to Anderson steps.
///
/// `always` and `preasymptotic` both safeguard every mixing step, starting
/// with the first one (the step that produces x_2). `asymptotic` runs plain
/// Anderson until ||w_{k+1}|| < threshold and safeguards from then on.
struct Activation
{
  enum class Kind
  {
    always,
    preasymptotic,
    asymptotic,
  };
  Kind kind = Kind::always;
  double threshold = 0.1;

  static Activation asymptotic(double threshold = 0.1) { return {Kind::asymptotic, threshold}; }
};

std::string to_string(const Activation &a);

struct ArmijoOptions
{
  double c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 20;
};

class ConfigError : public std::invalid_argument
{
public:
  explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

struct SolverConfig
{
  Method method = Method::newton;
  std::size_t depth = 1;  // Anderson depth m
  double r = 0.5;         // gna
  double r_hat = 0.5;     // agna
  Activation activation{};
  // Run NA(depth) until ||w_{k+1}|| drops below this, then continue as a
  // safeguarded depth-1 method (gna/agna only).
  std::optional<double> switch_to_m1_at;
  double tol = 1e-10;
  std::size_t max_iter = 200;
  double divergence_cap = 1e12;
  std::optional<ArmijoOptions> linesearch;

  // Solve depth-1 Anderson through the least-squares kernel instead of the
  // scalar closed form.
  bool depth1_via_least_squares = false;
  // Experiment knob: replace every safeguard lambda with this value.
  std::optional<double> fixed_lambda;
  // Symmetric positive-definite weight W for step-space norms ||v||_W^2 = v^T W v.
  // Residual norms stay Euclidean.
  std::optional<DenseMatrix> weight;

  /// Throws ConfigError on out-of-range fields.
  void validate() const;
};

/// Norm and inner product used for step-space quantities. Identity by default.
class StepMetric
{
public:
  StepMetric() = default;
  explicit StepMetric(const DenseMatrix &weight);

  double norm(std::span<const double> v) const;
  double dot(std::span<const double> a, std::span<const double> b) const;
  /// L^T v, where W = L L^T; the identity when unweighted.
  Vector transform(std::span<const double> v) const;

private:
  std::optional<DenseMatrix> factor_;
};

struct NewtonStep
{
  Vector w;
  double residual_norm = 0.0;
};

/// Solves f'(x) w = -f(x). Propagates SingularMatrix.
NewtonStep newton_step(const NonlinearProblem &p, std::span<const double> x);

/// Depth-1 mixing coefficient (w_next - w_prev)^T w_next / ||w_next - w_prev||^2.
/// Returns 0 when ||w_next - w_prev|| <= eps (||w_next|| + ||w_prev||).
double anderson_gamma_1(std::span<const double> w_next, std::span<const double> w_prev,
                        const StepMetric &metric = {});

/// x_k + w_next - lambda gamma ((x_k + w_next) - (x_prev + w_prev)).
/// With lambda * gamma == 0 the result is bitwise x_k + w_next.
Vector na_update(std::span<const double> x_k, std::span<const double> x_prev,
                 std::span<const double> w_next, std::span<const double> w_prev, double gamma,
                 double lambda);

struct DepthMixResult
{
  Vector x_next;
  Vector gamma; // size m_k
  double theta = 0.0;
  std::size_t columns = 0; // m_k
};

/// Depth-m Anderson update. `iterates` holds x_{k-L+1}, ..., x_k and `steps`
/// holds the matching Newton steps w_{k-L+2}, ..., w_{k+1} (oldest first,
/// equal length L >= 2). Uses m_k = min(L - 1, m, n) difference columns.
DepthMixResult na_m_update(std::span<const Vector> iterates, std::span<const Vector> steps,
                           std::size_t m, const StepMetric &metric = {});

/// Like na_m_update but with a caller-supplied gamma (size m_k).
Vector na_m_apply(std::span<const Vector> iterates, std::span<const Vector> steps,
                  std::span<const double> gamma);

struct SafeguardOutcome
{
  SafeguardDecision decision;
  double eta = 0.0;
  double r_used = 0.0;
  double beta = 0.0;
};

/// Fixed-r gamma-safeguarding: beta = r ||w_next|| / ||w_prev||.
SafeguardOutcome gamma_safeguard(std::span<const double> w_next, std::span<const double> w_prev,
                                 double gamma, double r, const StepMetric &metric = {});

/// Adaptive gamma-safeguarding: eta = ||w_next|| / ||w_prev||,
/// r_used = min(eta, r_hat), beta = r_used * eta.
SafeguardOutcome adaptive_gamma_safeguard(std::span<const double> w_next,
                                          std::span<const double> w_prev, double gamma,
                                          double r_hat, const StepMetric &metric = {});

/// Shared case logic once beta is known.
SafeguardDecision safeguard_decision(double gamma, double beta);

struct LinesearchResult
{
  double t = 1.0;
  bool accepted = true;
  int trials = 0;
};

/// Backtracking on 1/2 ||f||^2: the first t in {1, shrink, shrink^2, ...} with
/// 1/2||f(x + t d)||^2 <= 1/2||f(x)||^2 - c1 t ||f(x)||^2. After
/// max_backtracks rejected trials the last t is returned with accepted = false.
LinesearchResult armijo_backtrack(const NonlinearProblem &p, std::span<const double> x,
                                  std::span<const double> direction, double c1, double shrink,
                                  int max_backtracks);

/// Runs the configured method from x0. Never throws for numerical failures;
/// the outcome is reported in ConvergenceReport::status. Throws ConfigError for
/// a malformed configuration or an x0 of the wrong length.
ConvergenceReport solve(const NonlinearProblem &p, std::span<const double> x0,
                        const SolverConfig &cfg);

} // namespace nasolve

#endif
