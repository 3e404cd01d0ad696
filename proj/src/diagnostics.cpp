#include "nasolve/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nasolve {

std::vector<std::optional<double>> order_estimates(std::span<const double> step_norms)
{
  std::vector<std::optional<double>> q(step_norms.size());
  auto eligible = [](double v) { return v > 0.0 && v < 1.0; };
  for (std::size_t i = 1; i < step_norms.size(); ++i) {
    if (eligible(step_norms[i - 1]) && eligible(step_norms[i]))
      q[i] = std::log(step_norms[i]) / std::log(step_norms[i - 1]);
  }
  return q;
}

OrderEstimate estimate_order(std::span<const double> step_norms)
{
  for (double v : step_norms) {
    if (!(v > 0.0))
      throw std::invalid_argument("estimate_order: step norms must be positive");
  }
  OrderEstimate out;
  out.q = order_estimates(step_norms);

  std::vector<double> tail;
  for (auto it = out.q.rbegin(); it != out.q.rend() && tail.size() < 3; ++it) {
    if (*it)
      tail.push_back(**it);
  }
  if (tail.size() < 2)
    throw OrderUndefined("estimate_order: fewer than three consecutive step norms below one");
  std::sort(tail.begin(), tail.end());
  out.q_term = tail.size() == 3 ? tail[1] : 0.5 * (tail[0] + tail[1]);
  return out;
}

ErrorComponents split_error(std::span<const double> error, std::span<const double> null_vector)
{
  const double along = dot(null_vector, error);
  double range2 = 0.0;
  for (std::size_t i = 0; i < error.size(); ++i) {
    const double v = error[i] - along * null_vector[i];
    range2 += v * v;
  }
  ErrorComponents out;
  out.null_norm = std::abs(along);
  out.range_norm = std::sqrt(range2);
  out.sigma = out.null_norm < 1e-30 ? std::numeric_limits<double>::infinity()
                                    : out.range_norm / out.null_norm;
  return out;
}

std::vector<ErrorComponents> decompose_errors(const ConvergenceReport &report,
                                              const GroundTruth &truth)
{
  if (!truth.root || !truth.null_vector)
    throw MissingGroundTruth("decompose_errors: root and null vector are required");
  const Vector &root = *truth.root;
  const Vector &phi = *truth.null_vector;

  std::vector<ErrorComponents> out;
  out.reserve(report.records.size() + 1);
  for (const auto &rec : report.records)
    out.push_back(split_error(subtract(rec.x, root), phi));
  if (report.final_x.size() == root.size())
    out.push_back(split_error(subtract(report.final_x, root), phi));
  return out;
}

std::optional<double> projected_gamma(std::span<const double> w_next,
                                      std::span<const double> w_prev,
                                      std::span<const double> null_vector)
{
  // With P_N = phi phi^T both projections are multiples of phi, so gamma-hat
  // reduces to a ratio of the scalar coordinates along phi.
  const double a = dot(null_vector, w_next);
  const double b = dot(null_vector, w_prev);
  if (a == b)
    return std::nullopt;
  return a * (a - b) / ((a - b) * (a - b));
}

double scaled_gain(std::span<const double> w_next, std::span<const double> w_prev, double gamma,
                   double lambda)
{
  const double mix = lambda * gamma;
  Vector v(w_next.size());
  for (std::size_t i = 0; i < w_next.size(); ++i)
    v[i] = w_next[i] - mix * (w_next[i] - w_prev[i]);
  return norm2(v) / norm2(w_next);
}

GainHistory gain_history(const ConvergenceReport &report)
{
  GainHistory out;
  for (const auto &rec : report.records) {
    if (!rec.theta)
      continue;
    out.k.push_back(rec.k);
    out.theta.push_back(*rec.theta);
    out.theta_lambda.push_back(rec.theta_lambda.value_or(*rec.theta));
  }
  return out;
}

std::size_t quasi_restart_count(std::span<const double> r_history, double r_hat)
{
  const double terminal_level = r_hat / 10.0;
  std::size_t start = r_history.size();
  while (start > 0) {
    const double v = r_history[start - 1];
    if (v > terminal_level)
      break;
    if (start < r_history.size() && !(v > r_history[start]))
      break;
    --start;
  }
  return static_cast<std::size_t>(std::count_if(r_history.begin(), r_history.begin() + start,
                                                 [r_hat](double v) { return v < r_hat; }));
}

std::size_t quasi_restart_count(const ConvergenceReport &report, double r_hat)
{
  return quasi_restart_count(report.r_history, r_hat);
}

bool strictly_decreasing_tail(std::span<const double> values, std::size_t count)
{
  if (values.size() < count)
    return false;
  for (std::size_t i = values.size() - count + 1; i < values.size(); ++i) {
    if (!(values[i] < values[i - 1]))
      return false;
  }
  return true;
}

} // namespace nasolve
