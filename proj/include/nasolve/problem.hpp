#ifndef NASOLVE_PROBLEM_HPP
#define NASOLVE_PROBLEM_HPP

#include "nasolve/linalg.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>

namespace nasolve {

struct NamedParameter
{
  std::string name;
  double value = 0.0;
};

/// Known facts about the solution, when a problem can supply them.
struct GroundTruth
{
  std::optional<Vector> root;
  std::optional<Vector> null_vector; // unit vector spanning null(f'(root))
  bool is_singular = false;
  std::optional<NamedParameter> parameter;
};

using ResidualFn = std::function<Vector(std::span<const double>)>;
using JacobianFn = std::function<DenseMatrix(std::span<const double>)>;

/// f : R^n -> R^n together with its Jacobian.
///
/// Immutable once built. The residual and Jacobian callables must be
/// re-entrant so that one problem can be shared by concurrent solves.
class NonlinearProblem
{
public:
  NonlinearProblem(std::string name, std::size_t dimension, ResidualFn residual,
                   JacobianFn jacobian, GroundTruth truth = {}, Vector default_x0 = {});

  /// Builds a problem whose Jacobian is a forward-difference approximation with
  /// step sqrt(eps) * (1 + ||x||).
  static NonlinearProblem with_fd_jacobian(std::string name, std::size_t dimension,
                                           ResidualFn residual, GroundTruth truth = {},
                                           Vector default_x0 = {});

  const std::string &name() const { return name_; }
  std::size_t dimension() const { return dimension_; }
  const GroundTruth &truth() const { return truth_; }

  /// Initial iterate used when an experiment asks for the built-in default.
  const Vector &default_x0() const { return default_x0_; }

  Vector residual(std::span<const double> x) const;
  DenseMatrix jacobian(std::span<const double> x) const;

private:
  void check_input(std::span<const double> x) const;

  std::string name_;
  std::size_t dimension_;
  ResidualFn residual_;
  JacobianFn jacobian_;
  GroundTruth truth_;
  Vector default_x0_;
};

/// f(x1, x2) = (x1^2, x2). Root at the origin with a one-dimensional null
/// space spanned by (1, 0).
NonlinearProblem make_singular_quadratic();

/// Chandrasekhar H-equation on n midpoint nodes,
///   F(H)_i = H_i - (1 - c/(2n) sum_j mu_i H_j / (mu_i + mu_j))^{-1}.
/// The Jacobian at the physical solution is singular at c = 1.
/// Default initial iterate: all ones.
NonlinearProblem make_chandrasekhar(double c, std::size_t n);

/// Bratu problem u'' + lambda e^u = 0, u(0) = u(1) = 0, discretized with the
/// three-point Laplacian on n interior nodes (h = 1/(n+1)). The residual is
/// written as (-u_{i-1} + 2u_i - u_{i+1})/h^2 - lambda e^{u_i}.
/// Default initial iterate: zero.
NonlinearProblem make_bratu_1d(double lambda, std::size_t n);

/// Central-difference Jacobian check: max over j of
/// ||(f(x + h e_j) - f(x - h e_j)) / (2h) - f'(x) e_j||_inf.
double check_jacobian(const NonlinearProblem &p, std::span<const double> x, double h);

/// Builds a built-in problem by id: "singular_quadratic", "chandrasekhar"
/// (params c, n) or "bratu1d" (params lambda, n). Unknown ids or parameter
/// names throw std::invalid_argument.
NonlinearProblem make_problem(const std::string &id, const std::map<std::string, double> &params);

/// The parameter a sweep varies for a built-in id ("c", "lambda"), if any.
std::optional<std::string> sweep_parameter_name(const std::string &id);

} // namespace nasolve

#endif
