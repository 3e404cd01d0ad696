#include "nasolve/oracle.hpp"

#include "nasolve/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace nasolve::oracle {

double gamma_grid_oracle(std::span<const double> w_next, std::span<const double> w_prev,
                         double lo, double hi, double step)
{
  if (!(lo < hi) || !(step > 0.0))
    throw std::invalid_argument("gamma_grid_oracle: need lo < hi and step > 0");

  const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  double best_gamma = lo;
  double best_value = INFINITY;
  for (std::size_t i = 0; i < points; ++i) {
    const double g = lo + static_cast<double>(i) * step;
    double s = 0.0;
    for (std::size_t j = 0; j < w_next.size(); ++j) {
      const double r = w_next[j] - g * (w_next[j] - w_prev[j]);
      s += r * r;
    }
    if (s < best_value || (s == best_value && std::abs(g) < std::abs(best_gamma))) {
      best_value = s;
      best_gamma = g;
    }
  }
  return best_gamma;
}

double safeguard_case_oracle(double gamma, double beta)
{
  if (!(beta > 0.0))
    throw std::invalid_argument("safeguard_case_oracle: beta must be positive");

  // Case 1: no mixing at all.
  if (gamma == 0.0)
    return 0.0;
  if (gamma >= 1.0)
    return 0.0;

  // Case 2: gamma is too large relative to 1 - gamma; scale it back.
  // For 0 < gamma < 1 the test reads gamma/(1-gamma) > beta, for gamma < 0 it
  // reads -gamma/(1-gamma) > beta.
  if (gamma > 0.0) {
    if (gamma > beta * (1.0 - gamma))
      return beta / (gamma * (beta + 1.0));
  } else {
    if (-gamma > beta * (1.0 - gamma))
      return beta / (gamma * (beta - 1.0));
  }

  // Case 3: accept the full Anderson step.
  return 1.0;
}

DenseMatrix fd_jacobian(const NonlinearProblem &p, std::span<const double> x, double h)
{
  const std::size_t n = p.dimension();
  DenseMatrix jac(n, n);
  Vector xp(x.begin(), x.end());
  for (std::size_t j = 0; j < n; ++j) {
    xp[j] = x[j] + h;
    const Vector fp = p.residual(xp);
    xp[j] = x[j] - h;
    const Vector fm = p.residual(xp);
    xp[j] = x[j];
    for (std::size_t i = 0; i < n; ++i)
      jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  return jac;
}

std::optional<double> fold_sweep(std::size_t n, double lambda_start, double lambda_end,
                                 double lambda_step, FoldSweepOptions options)
{
  if (!(lambda_step > 0.0))
    throw std::invalid_argument("fold_sweep: lambda_step must be positive");

  SolverConfig cfg;
  cfg.method = Method::newton;
  cfg.max_iter = options.max_newton_iter;
  cfg.tol = options.tol;

  std::optional<double> last;
  Vector warm(n, 0.0);
  const double slack = 1e-9 * lambda_step;
  for (std::size_t i = 0;; ++i) {
    const double lambda = lambda_start + static_cast<double>(i) * lambda_step;
    if (lambda > lambda_end + slack)
      break;
    const NonlinearProblem p = make_bratu_1d(lambda, n);
    const ConvergenceReport report = solve(p, warm, cfg);
    if (report.status != SolveStatus::converged)
      break;
    last = lambda;
    warm = report.final_x;
  }
  return last;
}

} // namespace nasolve::oracle
