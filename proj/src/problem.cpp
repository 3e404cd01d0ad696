#include "nasolve/problem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace nasolve {

NonlinearProblem::NonlinearProblem(std::string name, std::size_t dimension, ResidualFn residual,
                                   JacobianFn jacobian, GroundTruth truth, Vector default_x0)
    : name_(std::move(name)), dimension_(dimension), residual_(std::move(residual)),
      jacobian_(std::move(jacobian)), truth_(std::move(truth)), default_x0_(std::move(default_x0))
{
  if (dimension_ == 0)
    throw std::invalid_argument("NonlinearProblem: dimension must be positive");
  if (!residual_ || !jacobian_)
    throw std::invalid_argument("NonlinearProblem: residual and jacobian are required");
  if (default_x0_.empty())
    default_x0_.assign(dimension_, 0.0);
  if (default_x0_.size() != dimension_)
    throw std::invalid_argument("NonlinearProblem: default initial iterate has wrong length");
}

NonlinearProblem NonlinearProblem::with_fd_jacobian(std::string name, std::size_t dimension,
                                                    ResidualFn residual, GroundTruth truth,
                                                    Vector default_x0)
{
  JacobianFn fd = [residual, dimension](std::span<const double> x) {
    const double h = std::sqrt(std::numeric_limits<double>::epsilon()) * (1.0 + norm2(x));
    const Vector f0 = residual(x);
    DenseMatrix jac(dimension, dimension);
    Vector xp(x.begin(), x.end());
    for (std::size_t j = 0; j < dimension; ++j) {
      const double saved = xp[j];
      xp[j] = saved + h;
      const Vector f1 = residual(xp);
      xp[j] = saved;
      for (std::size_t i = 0; i < dimension; ++i)
        jac(i, j) = (f1[i] - f0[i]) / h;
    }
    return jac;
  };
  return NonlinearProblem(std::move(name), dimension, std::move(residual), std::move(fd),
                          std::move(truth), std::move(default_x0));
}

void NonlinearProblem::check_input(std::span<const double> x) const
{
  if (x.size() != dimension_)
    throw std::invalid_argument(name_ + ": point has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(dimension_));
}

Vector NonlinearProblem::residual(std::span<const double> x) const
{
  check_input(x);
  Vector f = residual_(x);
  if (f.size() != dimension_)
    throw std::logic_error(name_ + ": residual returned the wrong length");
  return f;
}

DenseMatrix NonlinearProblem::jacobian(std::span<const double> x) const
{
  check_input(x);
  DenseMatrix j = jacobian_(x);
  if (j.rows() != dimension_ || j.cols() != dimension_)
    throw std::logic_error(name_ + ": jacobian returned the wrong shape");
  return j;
}

NonlinearProblem make_singular_quadratic()
{
  GroundTruth truth;
  truth.root = Vector{0.0, 0.0};
  truth.null_vector = Vector{1.0, 0.0};
  truth.is_singular = true;
  return NonlinearProblem(
      "singular_quadratic", 2,
      [](std::span<const double> x) { return Vector{x[0] * x[0], x[1]}; },
      [](std::span<const double> x) {
        return DenseMatrix(2, 2, {2.0 * x[0], 0.0, 0.0, 1.0});
      },
      std::move(truth), Vector{1.0, 1.0});
}

NonlinearProblem make_chandrasekhar(double c, std::size_t n)
{
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("chandrasekhar: c must lie in (0, 1]");
  if (n < 2)
    throw std::invalid_argument("chandrasekhar: n must be at least 2");

  // kernel(i, j) = c/(2n) * mu_i / (mu_i + mu_j)
  DenseMatrix kernel(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu_i = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double mu_j = (static_cast<double>(j) + 0.5) / static_cast<double>(n);
      kernel(i, j) = c / (2.0 * static_cast<double>(n)) * mu_i / (mu_i + mu_j);
    }
  }

  auto denominators = [kernel](std::span<const double> h) {
    Vector s = kernel.apply(h);
    for (double &v : s)
      v = 1.0 - v;
    return s;
  };

  GroundTruth truth;
  truth.is_singular = (c == 1.0);
  truth.parameter = NamedParameter{"c", c};
  return NonlinearProblem(
      "chandrasekhar", n,
      [denominators](std::span<const double> h) {
        const Vector s = denominators(h);
        Vector f(h.size());
        for (std::size_t i = 0; i < h.size(); ++i)
          f[i] = h[i] - 1.0 / s[i];
        return f;
      },
      [denominators, kernel, n](std::span<const double> h) {
        const Vector s = denominators(h);
        DenseMatrix jac(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double scale = 1.0 / (s[i] * s[i]);
          for (std::size_t j = 0; j < n; ++j)
            jac(i, j) = (i == j ? 1.0 : 0.0) - scale * kernel(i, j);
        }
        return jac;
      },
      std::move(truth), Vector(n, 1.0));
}

NonlinearProblem make_bratu_1d(double lambda, std::size_t n)
{
  if (n < 3)
    throw std::invalid_argument("bratu1d: n must be at least 3");
  if (!(lambda >= 0.0))
    throw std::invalid_argument("bratu1d: lambda must be non-negative");

  const double h = 1.0 / static_cast<double>(n + 1);
  const double inv_h2 = 1.0 / (h * h);

  GroundTruth truth;
  truth.parameter = NamedParameter{"lambda", lambda};
  if (lambda == 0.0)
    truth.root = Vector(n, 0.0);

  return NonlinearProblem(
      "bratu1d", n,
      [lambda, inv_h2, n](std::span<const double> u) {
        Vector f(n);
        for (std::size_t i = 0; i < n; ++i) {
          const double left = i > 0 ? u[i - 1] : 0.0;
          const double right = i + 1 < n ? u[i + 1] : 0.0;
          f[i] = (2.0 * u[i] - left - right) * inv_h2 - lambda * std::exp(u[i]);
        }
        return f;
      },
      [lambda, inv_h2, n](std::span<const double> u) {
        DenseMatrix jac(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          jac(i, i) = 2.0 * inv_h2 - lambda * std::exp(u[i]);
          if (i > 0)
            jac(i, i - 1) = -inv_h2;
          if (i + 1 < n)
            jac(i, i + 1) = -inv_h2;
        }
        return jac;
      },
      std::move(truth), Vector(n, 0.0));
}

double check_jacobian(const NonlinearProblem &p, std::span<const double> x, double h)
{
  if (!(h > 0.0))
    throw std::invalid_argument("check_jacobian: h must be positive");
  const DenseMatrix jac = p.jacobian(x);
  Vector xp(x.begin(), x.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < p.dimension(); ++j) {
    const double saved = xp[j];
    xp[j] = saved + h;
    const Vector fp = p.residual(xp);
    xp[j] = saved - h;
    const Vector fm = p.residual(xp);
    xp[j] = saved;
    double col = 0.0;
    for (std::size_t i = 0; i < p.dimension(); ++i)
      col = std::max(col, std::abs((fp[i] - fm[i]) / (2.0 * h) - jac(i, j)));
    worst = std::max(worst, col);
  }
  return worst;
}

namespace {

double take(std::map<std::string, double> &params, const std::string &key, double fallback)
{
  auto it = params.find(key);
  if (it == params.end())
    return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

std::size_t take_size(std::map<std::string, double> &params, const std::string &key,
                      std::size_t fallback)
{
  const double v = take(params, key, static_cast<double>(fallback));
  if (!(v >= 0.0) || v != std::floor(v))
    throw std::invalid_argument("parameter '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

void reject_leftovers(const std::string &id, const std::map<std::string, double> &params)
{
  if (!params.empty())
    throw std::invalid_argument(id + ": unknown parameter '" + params.begin()->first + "'");
}

} // namespace

NonlinearProblem make_problem(const std::string &id, const std::map<std::string, double> &params)
{
  auto rest = params;
  if (id == "singular_quadratic") {
    reject_leftovers(id, rest);
    return make_singular_quadratic();
  }
  if (id == "chandrasekhar") {
    const double c = take(rest, "c", 1.0);
    const std::size_t n = take_size(rest, "n", 100);
    reject_leftovers(id, rest);
    return make_chandrasekhar(c, n);
  }
  if (id == "bratu1d") {
    const double lambda = take(rest, "lambda", 1.0);
    const std::size_t n = take_size(rest, "n", 100);
    reject_leftovers(id, rest);
    return make_bratu_1d(lambda, n);
  }
  throw std::invalid_argument("unknown problem id '" + id + "'");
}

std::optional<std::string> sweep_parameter_name(const std::string &id)
{
  if (id == "chandrasekhar")
    return "c";
  if (id == "bratu1d")
    return "lambda";
  return std::nullopt;
}

} // namespace nasolve
