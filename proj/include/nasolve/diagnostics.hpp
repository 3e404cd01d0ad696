#ifndef NASOLVE_DIAGNOSTICS_HPP
#define NASOLVE_DIAGNOSTICS_HPP

#include "nasolve/problem.hpp"
#include "nasolve/report.hpp"

#include <optional>
#include <stdexcept>
#include <vector>

namespace nasolve {

class OrderUndefined : public std::runtime_error
{
public:
  explicit OrderUndefined(const std::string &what) : std::runtime_error(what) {}
};

class MissingGroundTruth : public std::runtime_error
{
public:
  explicit MissingGroundTruth(const std::string &what) : std::runtime_error(what) {}
};

struct OrderEstimate
{
  // q[i] estimates the order at norms[i]; absent for i = 0 and wherever
  // norms[i-1] or norms[i] is not in (0, 1).
  std::vector<std::optional<double>> q;
  double q_term = 0.0;
};

/// Per-step order estimates q_{k+1} = log||w_{k+1}|| / log||w_k||.
/// q_term is the median of the last (up to) three estimates.
/// Throws OrderUndefined when fewer than two estimates exist, i.e. fewer than
/// three consecutive norms below one.
OrderEstimate estimate_order(std::span<const double> step_norms);

/// Same as estimate_order but returns the per-step values only; never throws.
std::vector<std::optional<double>> order_estimates(std::span<const double> step_norms);

/// ||P_N e||, ||P_R e|| and sigma for a single error vector and unit null vector.
ErrorComponents split_error(std::span<const double> error, std::span<const double> null_vector);

/// Error decomposition for x_0, ..., x_K (every recorded iterate plus the
/// final one). Throws MissingGroundTruth unless root and null vector are known.
std::vector<ErrorComponents> decompose_errors(const ConvergenceReport &report,
                                              const GroundTruth &truth);

/// gamma-hat built from the null-space projections of two consecutive Newton
/// steps, or nullopt when the projected difference vanishes.
std::optional<double> projected_gamma(std::span<const double> w_next,
                                      std::span<const double> w_prev,
                                      std::span<const double> null_vector);

struct GainHistory
{
  std::vector<std::size_t> k;
  std::vector<double> theta;
  std::vector<double> theta_lambda;
};

/// Optimization gains of every mixing step in the report.
GainHistory gain_history(const ConvergenceReport &report);

/// theta^lambda = ||w_next - lambda gamma (w_next - w_prev)|| / ||w_next||.
double scaled_gain(std::span<const double> w_next, std::span<const double> w_prev, double gamma,
                   double lambda);

/// Counts entries with r < r_hat that occur before the terminal decay of
/// r_history. The terminal decay is the longest strictly decreasing suffix
/// whose values all sit at or below r_hat / 10.
std::size_t quasi_restart_count(std::span<const double> r_history, double r_hat);
std::size_t quasi_restart_count(const ConvergenceReport &report, double r_hat);

/// True when the tail of `values` (last `count` entries) is strictly decreasing.
bool strictly_decreasing_tail(std::span<const double> values, std::size_t count);

} // namespace nasolve

#endif
