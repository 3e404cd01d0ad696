#ifndef NASOLVE_LINALG_HPP
#define NASOLVE_LINALG_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace nasolve {

using Vector = std::vector<double>;

/// Dense row-major matrix. Small and owning; sized for desk-scale Jacobians
/// and the n x m difference matrices of depth-m Anderson mixing.
class DenseMatrix
{
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> entries() const { return data_; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  Vector apply(std::span<const double> x) const;
  double max_abs() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Raised when LU elimination meets a pivot below eps * max|A|.
class SingularMatrix : public std::runtime_error
{
public:
  explicit SingularMatrix(const std::string &what) : std::runtime_error(what) {}
};

// Vector helpers. All norms are Euclidean.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector add(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
bool all_finite(std::span<const double> a);

/// Solves A x = b by LU with partial pivoting.
/// Throws SingularMatrix if A is numerically singular and std::invalid_argument
/// on a shape mismatch.
Vector solve_linear(const DenseMatrix &a, std::span<const double> b);

/// Minimizes ||b - F g||_2 by Householder QR with column pivoting.
///
/// Columns whose pivoted diagonal |R_jj| falls below 1e-12 * |R_11| are
/// dropped and receive a zero coefficient. A zero matrix yields g = 0.
Vector least_squares(const DenseMatrix &f, std::span<const double> b);

/// Rank retained by the last-pivoted QR for `f` (same truncation rule as
/// least_squares).
std::size_t numerical_rank(const DenseMatrix &f);

/// Cholesky factor L (lower) of a symmetric positive-definite matrix.
/// Throws std::invalid_argument if the matrix is not SPD.
DenseMatrix cholesky(const DenseMatrix &a);

} // namespace nasolve

#endif
