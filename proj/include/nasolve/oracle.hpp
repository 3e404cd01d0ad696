#ifndef NASOLVE_ORACLE_HPP
#define NASOLVE_ORACLE_HPP

// Brute-force reference computations used to cross-check the solver. Nothing
// here shares code with the solver's mixing or safeguard paths.

#include "nasolve/linalg.hpp"
#include "nasolve/problem.hpp"

#include <optional>

namespace nasolve::oracle {

/// Grid minimizer of ||w_next - g (w_next - w_prev)|| over g = lo + i*step.
/// Ties go to the grid point of smallest |g|.
double gamma_grid_oracle(std::span<const double> w_next, std::span<const double> w_prev,
                         double lo, double hi, double step);

/// Safeguard lambda for a given gamma and beta, by direct case enumeration.
double safeguard_case_oracle(double gamma, double beta);

/// Central-difference Jacobian with step h.
DenseMatrix fd_jacobian(const NonlinearProblem &p, std::span<const double> x, double h);

struct FoldSweepOptions
{
  std::size_t max_newton_iter = 50;
  double tol = 1e-8;
};

/// Natural-parameter continuation on bratu1d(n): sweeps lambda upward from
/// lambda_start, warm-starting each Newton solve from the previous solution
/// (the first from zero). Returns the last lambda that converged before the
/// first failure, or nullopt if the very first solve fails.
std::optional<double> fold_sweep(std::size_t n, double lambda_start, double lambda_end,
                                 double lambda_step, FoldSweepOptions options = {});

} // namespace nasolve::oracle

#endif
