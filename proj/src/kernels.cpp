#include "sabal/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>

#include "sabal/error.hpp"

namespace sabal::kernels {

#ifndef SABAL_HAVE_AVX2_TU
namespace detail {
const Table* avx2_table() noexcept { return nullptr; }
}  // namespace detail
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() noexcept {
  return backend_available(Backend::Avx2) ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

const detail::Table& table() {
  return current().load(std::memory_order_relaxed) == Backend::Avx2 ? *detail::avx2_table()
                                                                     : detail::scalar_table();
}

void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

const char* backend_name(Backend backend) noexcept {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) noexcept {
  if (backend == Backend::Scalar) return true;
  return detail::avx2_table() != nullptr && cpu_has_avx2();
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (!backend_available(backend))
    throw std::invalid_argument(std::string("kernel backend not available: ") +
                                backend_name(backend));
  current().store(backend, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(a.size(), b.size(), "dot");
  return table().dot(a.data(), b.data(), a.size());
}

double squared_norm(std::span<const double> a) { return table().dot(a.data(), a.data(), a.size()); }

double sum(std::span<const double> a) { return table().sum(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same(x.size(), y.size(), "axpy");
  table().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require_same(a.cols(), x.size(), "gemv columns");
  require_same(a.rows(), y.size(), "gemv rows");
  const auto& t = table();
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    if (x[j] == 0.0) continue;
    t.axpy(x[j], a.data() + j * a.rows(), y.data(), a.rows());
  }
}

void gemv_t(const Matrix& a, std::span<const double> x, std::span<double> y) {
  require_same(a.rows(), x.size(), "gemv_t rows");
  require_same(a.cols(), y.size(), "gemv_t columns");
  table().gemv_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

}  // namespace sabal::kernels
