#pragma once

// Dense vector kernels used by every inner loop of the solvers and models.
//
// Each kernel has a scalar reference implementation and an AVX2/FMA variant.
// The variant is chosen once at startup from the CPU's capabilities and can be
// overridden (tests force each backend to check they agree).

#include <cstddef>
#include <span>

#include "sabal/matrix.hpp"

namespace sabal::kernels {

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend backend) noexcept;
bool backend_available(Backend backend) noexcept;
Backend active_backend() noexcept;
/// Throws std::invalid_argument when the backend is not available on this CPU.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double sum(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = A x. Columns with x[j] == 0 are skipped, so sparse x costs O(rows * nnz).
void gemv(const Matrix& a, std::span<const double> x, std::span<double> y);
/// y = A^T x
void gemv_t(const Matrix& a, std::span<const double> x, std::span<double> y);

// Function table shared by the backend translation units.
namespace detail {
struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*gemv_t)(const double*, std::size_t, std::size_t, const double*, double*);
};
const Table& scalar_table() noexcept;
const Table* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace sabal::kernels
