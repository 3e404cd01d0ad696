#include "doctest.h"

#include "nasolve/problem.hpp"
#include "nasolve/solver.hpp"

#include <cmath>
#include <random>

using namespace nasolve;

namespace {

Vector uniform_point(std::mt19937_64 &rng, std::size_t n, double lo, double hi)
{
  std::uniform_real_distribution<double> dist(lo, hi);
  Vector x(n);
  for (double &v : x)
    v = dist(rng);
  return x;
}

} // namespace

TEST_CASE("singular_quadratic residual and Jacobian")
{
  const NonlinearProblem p = make_singular_quadratic();
  CHECK(p.dimension() == 2);
  CHECK(p.residual(Vector{1, 1}) == Vector{1, 1});
  const DenseMatrix j = p.jacobian(Vector{1, 1});
  CHECK(j(0, 0) == 2.0);
  CHECK(j(0, 1) == 0.0);
  CHECK(j(1, 0) == 0.0);
  CHECK(j(1, 1) == 1.0);
  CHECK(p.default_x0() == Vector{1, 1});
}

TEST_CASE("singular_quadratic ground truth")
{
  const NonlinearProblem p = make_singular_quadratic();
  const GroundTruth &t = p.truth();
  REQUIRE(t.root);
  REQUIRE(t.null_vector);
  CHECK(t.is_singular);
  CHECK(norm2(p.residual(*t.root)) <= 1e-10 * (1.0 + norm2(*t.root)));

  const DenseMatrix j = p.jacobian(*t.root);
  CHECK(norm2(j.apply(*t.null_vector)) <= 1e-8);
  CHECK(std::abs(norm2(*t.null_vector) - 1.0) <= 1e-12);
  CHECK(numerical_rank(j) == 1);
}

TEST_CASE("singular_quadratic Newton halves the first component")
{
  const NonlinearProblem p = make_singular_quadratic();
  Vector x{1, 1};
  for (int k = 1; k <= 30; ++k) {
    const NewtonStep s = newton_step(p, x);
    x = add(x, s.w);
    CHECK(x[0] == std::ldexp(1.0, -k));
    CHECK(x[1] == 0.0);
  }
}

TEST_CASE("check_jacobian examples")
{
  CHECK(check_jacobian(make_singular_quadratic(), Vector{1, 1}, 1e-5) <= 1e-6);
  CHECK(check_jacobian(make_singular_quadratic(), Vector{0, 0}, 1e-5) <= 1e-14);
  const NonlinearProblem c = make_chandrasekhar(0.5, 10);
  CHECK(check_jacobian(c, c.default_x0(), 1e-6) <= 1e-5);
}

TEST_CASE("analytic Jacobians agree with central differences at random points")
{
  std::mt19937_64 rng(2024);
  const NonlinearProblem quad = make_singular_quadratic();
  const NonlinearProblem chandra = make_chandrasekhar(0.9, 20);
  const NonlinearProblem chandra1 = make_chandrasekhar(1.0, 20);
  const NonlinearProblem bratu = make_bratu_1d(2.0, 20);
  for (int trial = 0; trial < 10; ++trial) {
    CHECK(check_jacobian(quad, uniform_point(rng, 2, -2, 2), 1e-5) <= 1e-4);
    CHECK(check_jacobian(chandra, uniform_point(rng, 20, 0.5, 1.5), 1e-5) <= 1e-4);
    CHECK(check_jacobian(chandra1, uniform_point(rng, 20, 0.5, 1.5), 1e-5) <= 1e-4);
    CHECK(check_jacobian(bratu, uniform_point(rng, 20, -1, 1), 1e-5) <= 1e-4);
  }
}

TEST_CASE("chandrasekhar metadata and the weak-coupling limit")
{
  const NonlinearProblem p = make_chandrasekhar(1.0, 8);
  CHECK(p.dimension() == 8);
  CHECK(p.truth().is_singular);
  REQUIRE(p.truth().parameter);
  CHECK(p.truth().parameter->name == "c");
  CHECK(p.truth().parameter->value == 1.0);
  CHECK(p.default_x0() == Vector(8, 1.0));
  CHECK_FALSE(make_chandrasekhar(0.5, 8).truth().is_singular);

  const NonlinearProblem weak = make_chandrasekhar(1e-14, 50);
  CHECK(norm_inf(weak.residual(Vector(50, 1.0))) <= 1e-14);
}

TEST_CASE("chandrasekhar residual against a direct evaluation")
{
  const std::size_t n = 3;
  const double c = 0.8;
  const NonlinearProblem p = make_chandrasekhar(c, n);
  const Vector h{1.1, 1.2, 1.3};
  const Vector f = p.residual(h);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = (static_cast<double>(i) + 0.5) / n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double mj = (static_cast<double>(j) + 0.5) / n;
      s += mi * h[j] / (mi + mj);
    }
    CHECK(f[i] == doctest::Approx(h[i] - 1.0 / (1.0 - c / (2.0 * n) * s)).epsilon(1e-14));
  }
}

TEST_CASE("bratu1d at lambda = 0 is the discrete Laplacian")
{
  const NonlinearProblem p = make_bratu_1d(0.0, 5);
  REQUIRE(p.truth().root);
  CHECK(*p.truth().root == Vector(5, 0.0));
  CHECK(p.residual(Vector(5, 0.0)) == Vector(5, 0.0));
  CHECK_FALSE(p.truth().is_singular);
  CHECK(p.default_x0() == Vector(5, 0.0));

  // h = 1/6, so 1/h^2 = 36.
  const Vector f = p.residual(Vector{1, 0, 0, 0, 0});
  CHECK(f[0] == doctest::Approx(72.0));
  CHECK(f[1] == doctest::Approx(-36.0));
  CHECK(f[2] == 0.0);
}

TEST_CASE("bratu1d residual includes the exponential source")
{
  const NonlinearProblem p = make_bratu_1d(2.0, 4);
  const Vector f = p.residual(Vector(4, 0.0));
  for (double v : f)
    CHECK(v == doctest::Approx(-2.0));
  REQUIRE(p.truth().parameter);
  CHECK(p.truth().parameter->name == "lambda");
  CHECK_FALSE(p.truth().root);
}

TEST_CASE("constructors reject out-of-range parameters")
{
  CHECK_THROWS_AS(make_chandrasekhar(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_chandrasekhar(1.5, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_chandrasekhar(0.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_bratu_1d(-1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_bratu_1d(1.0, 2), std::invalid_argument);
}

TEST_CASE("residual and jacobian check the input length")
{
  const NonlinearProblem p = make_singular_quadratic();
  CHECK_THROWS_AS(p.residual(Vector{1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(p.jacobian(Vector{1}), std::invalid_argument);
}

TEST_CASE("make_problem by id")
{
  CHECK(make_problem("singular_quadratic", {}).dimension() == 2);
  CHECK(make_problem("chandrasekhar", {}).dimension() == 100);
  CHECK(make_problem("chandrasekhar", {{"c", 0.5}, {"n", 12}}).dimension() == 12);
  CHECK(make_problem("bratu1d", {{"lambda", 2.0}, {"n", 30}}).truth().parameter->value == 2.0);
  CHECK_THROWS_AS(make_problem("nope", {}), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("bratu1d", {{"mu", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_problem("singular_quadratic", {{"c", 1.0}}), std::invalid_argument);

  CHECK(sweep_parameter_name("bratu1d") == "lambda");
  CHECK(sweep_parameter_name("chandrasekhar") == "c");
  CHECK_FALSE(sweep_parameter_name("singular_quadratic"));
}

TEST_CASE("finite-difference Jacobian fallback")
{
  const NonlinearProblem fd = NonlinearProblem::with_fd_jacobian(
      "quad_fd", 2, [](std::span<const double> x) { return Vector{x[0] * x[0], x[1]}; });
  const DenseMatrix j = fd.jacobian(Vector{1, 1});
  CHECK(j(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(j(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(j(0, 1)) <= 1e-7);

  const ConvergenceReport r = solve(fd, Vector{1, 1}, SolverConfig{});
  CHECK(r.status == SolveStatus::converged);
}
