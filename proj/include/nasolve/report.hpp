#ifndef NASOLVE_REPORT_HPP
#define NASOLVE_REPORT_HPP

#include "nasolve/linalg.hpp"

#include <optional>
#include <string_view>

namespace nasolve {

enum class SafeguardCase
{
  not_applied,          // plain Anderson step, lambda = 1
  gamma_zero_or_ge_one, // lambda = 0
  ratio_exceeded,       // lambda = beta / (gamma (beta + sign(gamma)))
  pass_through,         // lambda = 1
};

struct SafeguardDecision
{
  SafeguardCase kind = SafeguardCase::not_applied;
  double lambda_value = 1.0;
};

std::string_view to_string(SafeguardCase c);

/// One step of a solve, taken from x_k with Newton step w_{k+1}.
/// Optional fields are absent when the step did not compute them (for
/// example a Newton step has no gamma, and plain Anderson has no r or beta).
struct IterationRecord
{
  std::size_t k = 0;
  Vector x;                    // x_k
  Vector w;                    // w_{k+1}
  Vector gamma;                // empty for Newton steps; size m_k otherwise
  std::optional<double> lambda;
  std::optional<double> eta;   // ||w_{k+1}|| / ||w_k||
  std::optional<double> r_used;
  std::optional<double> beta;
  std::optional<double> theta;        // optimization gain of the unconstrained gamma
  std::optional<double> theta_lambda; // gain of the applied lambda * gamma
  std::optional<double> q;            // log||w_{k+1}|| / log||w_k||
  std::optional<double> gamma_hat;    // null-space projected gamma (needs ground truth)
  double step_norm = 0.0;
  double residual_norm = 0.0;
  std::optional<SafeguardDecision> decision;
  double step_length = 1.0;   // Armijo step length applied to the composite step
  bool linesearch_failed = false;
};

enum class SolveStatus
{
  converged,
  diverged,
  singular_jacobian,
  max_iter,
};

std::string_view to_string(SolveStatus s);

/// Null/range split of the error e_k = x_k - x* against a known root.
struct ErrorComponents
{
  double null_norm = 0.0;  // ||P_N e_k||
  double range_norm = 0.0; // ||P_R e_k||
  double sigma = 0.0;      // range_norm / null_norm, +inf when null_norm < 1e-30
};

struct ConvergenceReport
{
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::max_iter;
  std::size_t iterations = 0;
  std::optional<double> q_term;
  std::vector<double> r_history;
  std::optional<std::vector<ErrorComponents>> error_decomposition;
  Vector final_x;
  double final_residual_norm = 0.0;
};

} // namespace nasolve

#endif
