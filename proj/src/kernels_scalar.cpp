#include "sabal/kernels.hpp"

namespace sabal::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv_t_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                   double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = dot_scalar(a + j * rows, x, rows);
}

}  // namespace

const Table& scalar_table() noexcept {
  static const Table table{dot_scalar, sum_scalar, axpy_scalar, gemv_t_scalar};
  return table;
}

}  // namespace sabal::kernels::detail
