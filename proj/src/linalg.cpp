#include "nasolve/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace nasolve {

namespace {

constexpr double kRankTolerance = 1e-12;

struct PivotedQR
{
  DenseMatrix qr; // Householder vectors below the diagonal, R on and above
  Vector qtb;     // Q^T b, when a right-hand side was supplied
  std::vector<std::size_t> perm;
  std::size_t rank = 0;
};

PivotedQR pivoted_qr(const DenseMatrix &f, std::span<const double> b)
{
  const std::size_t n = f.rows();
  const std::size_t m = f.cols();
  PivotedQR out{f, Vector(b.begin(), b.end()), std::vector<std::size_t>(m), 0};
  std::iota(out.perm.begin(), out.perm.end(), std::size_t{0});
  DenseMatrix &a = out.qr;
  const std::size_t steps = std::min(n, m);

  double r11 = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    // Pick the remaining column with the largest trailing norm.
    std::size_t pivot = j;
    double best = -1.0;
    for (std::size_t k = j; k < m; ++k) {
      double s = 0.0;
      for (std::size_t i = j; i < n; ++i)
        s += a(i, k) * a(i, k);
      if (s > best) {
        best = s;
        pivot = k;
      }
    }
    if (pivot != j) {
      for (std::size_t i = 0; i < n; ++i)
        std::swap(a(i, j), a(i, pivot));
      std::swap(out.perm[j], out.perm[pivot]);
    }

    const double alpha_norm = std::sqrt(best);
    if (j == 0)
      r11 = alpha_norm;
    if (alpha_norm == 0.0 || alpha_norm <= kRankTolerance * r11)
      break;

    // Householder reflector mapping a(j:, j) onto -sign(a_jj) ||.|| e_1.
    const double alpha = a(j, j) >= 0.0 ? -alpha_norm : alpha_norm;
    Vector v(n - j);
    for (std::size_t i = j; i < n; ++i)
      v[i - j] = a(i, j);
    v[0] -= alpha;
    const double vnorm2 = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);

    a(j, j) = alpha;
    for (std::size_t i = j + 1; i < n; ++i)
      a(i, j) = 0.0;
    if (vnorm2 > 0.0) {
      for (std::size_t k = j + 1; k < m; ++k) {
        double s = 0.0;
        for (std::size_t i = j; i < n; ++i)
          s += v[i - j] * a(i, k);
        s = 2.0 * s / vnorm2;
        for (std::size_t i = j; i < n; ++i)
          a(i, k) -= s * v[i - j];
      }
      if (!out.qtb.empty()) {
        double s = 0.0;
        for (std::size_t i = j; i < n; ++i)
          s += v[i - j] * out.qtb[i];
        s = 2.0 * s / vnorm2;
        for (std::size_t i = j; i < n; ++i)
          out.qtb[i] -= s * v[i - j];
      }
    }
    out.rank = j + 1;
  }
  return out;
}

} // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill)
{
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries))
{
  if (data_.size() != rows_ * cols_)
    throw std::invalid_argument("DenseMatrix: entries length does not match rows*cols");
}

DenseMatrix DenseMatrix::identity(std::size_t n)
{
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    out(i, i) = 1.0;
  return out;
}

Vector DenseMatrix::column(std::size_t j) const
{
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    out[i] = (*this)(i, j);
  return out;
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> values)
{
  for (std::size_t i = 0; i < rows_; ++i)
    (*this)(i, j) = values[i];
}

Vector DenseMatrix::apply(std::span<const double> x) const
{
  if (x.size() != cols_)
    throw std::invalid_argument("DenseMatrix::apply: dimension mismatch");
  Vector out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j)
      s += (*this)(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

double DenseMatrix::max_abs() const
{
  double m = 0.0;
  for (double v : data_)
    m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a)
{
  return std::sqrt(dot(a, a));
}

double norm_inf(std::span<const double> a)
{
  double m = 0.0;
  for (double v : a)
    m = std::max(m, std::abs(v));
  return m;
}

Vector subtract(std::span<const double> a, std::span<const double> b)
{
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = a[i] - b[i];
  return out;
}

Vector add(std::span<const double> a, std::span<const double> b)
{
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = a[i] + b[i];
  return out;
}

Vector scaled(std::span<const double> a, double s)
{
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = s * a[i];
  return out;
}

bool all_finite(std::span<const double> a)
{
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Vector solve_linear(const DenseMatrix &a, std::span<const double> b)
{
  const std::size_t n = a.rows();
  if (a.cols() != n)
    throw std::invalid_argument("solve_linear: matrix is not square");
  if (b.size() != n)
    throw std::invalid_argument("solve_linear: right-hand side has wrong length");

  DenseMatrix lu = a;
  Vector x(b.begin(), b.end());
  const double threshold = std::numeric_limits<double>::epsilon() * a.max_abs();

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        p = i;
      }
    }
    if (!(best > threshold))
      throw SingularMatrix("solve_linear: pivot " + std::to_string(best) + " at column " +
                           std::to_string(k) + " is numerically zero");
    if (p != k) {
      auto rk = lu.row(k);
      auto rp = lu.row(p);
      std::swap_ranges(rk.begin(), rk.end(), rp.begin());
      std::swap(x[k], x[p]);
    }
    const double pivot = lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / pivot;
      if (factor == 0.0)
        continue;
      lu(i, k) = factor;
      for (std::size_t j = k + 1; j < n; ++j)
        lu(i, j) -= factor * lu(k, j);
      x[i] -= factor * x[k];
    }
  }

  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j)
      s -= lu(ii, j) * x[j];
    x[ii] = s / lu(ii, ii);
  }
  return x;
}

Vector least_squares(const DenseMatrix &f, std::span<const double> b)
{
  if (b.size() != f.rows())
    throw std::invalid_argument("least_squares: right-hand side has wrong length");
  if (f.cols() == 0 || f.rows() < f.cols())
    throw std::invalid_argument("least_squares: requires rows >= cols >= 1");

  const PivotedQR qr = pivoted_qr(f, b);
  Vector z(qr.rank, 0.0);
  for (std::size_t ii = qr.rank; ii-- > 0;) {
    double s = qr.qtb[ii];
    for (std::size_t j = ii + 1; j < qr.rank; ++j)
      s -= qr.qr(ii, j) * z[j];
    z[ii] = s / qr.qr(ii, ii);
  }
  Vector gamma(f.cols(), 0.0);
  for (std::size_t i = 0; i < qr.rank; ++i)
    gamma[qr.perm[i]] = z[i];
  return gamma;
}

std::size_t numerical_rank(const DenseMatrix &f)
{
  return pivoted_qr(f, {}).rank;
}

DenseMatrix cholesky(const DenseMatrix &a)
{
  const std::size_t n = a.rows();
  if (a.cols() != n)
    throw std::invalid_argument("cholesky: matrix is not square");
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (1.0 + std::abs(a(i, j))))
        throw std::invalid_argument("cholesky: matrix is not symmetric");
    }
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k)
      d -= l(j, k) * l(j, k);
    if (!(d > 0.0))
      throw std::invalid_argument("cholesky: matrix is not positive definite");
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k)
        s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

} // namespace nasolve
