#include "pc/kernels.hpp"

#include <atomic>
#include <cmath>

namespace pc::kernels {

namespace {
std::atomic<bool> g_parallel{true};
// Below this many independent outputs the fork/join overhead dominates.
constexpr std::size_t kParallelThreshold = 128;
}  // namespace

bool parallel_enabled() { return g_parallel.load(std::memory_order_relaxed); }
void set_parallel(bool on) { g_parallel.store(on, std::memory_order_relaxed); }

void matvec_serial(const double* W, std::size_t rows, std::size_t cols,
                   const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec_omp(const double* W, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
#pragma omp parallel for schedule(static) if (rows >= kParallelThreshold)
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

void matvec(const double* W, std::size_t rows, std::size_t cols,
            const double* x, double* y) {
  if (parallel_enabled())
    matvec_omp(W, rows, cols, x, y);
  else
    matvec_serial(W, rows, cols, x, y);
}

void matvec_tadd_serial(const double* W, std::size_t rows, std::size_t cols,
                        const double* g, double* dx) {
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += W[r * cols + c] * g[r];
    dx[c] += acc;
  }
}

void matvec_tadd_omp(const double* W, std::size_t rows, std::size_t cols,
                     const double* g, double* dx) {
#pragma omp parallel for schedule(static) if (cols >= kParallelThreshold)
  for (std::size_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += W[r * cols + c] * g[r];
    dx[c] += acc;
  }
}

void matvec_tadd(const double* W, std::size_t rows, std::size_t cols,
                 const double* g, double* dx) {
  if (parallel_enabled())
    matvec_tadd_omp(W, rows, cols, g, dx);
  else
    matvec_tadd_serial(W, rows, cols, g, dx);
}

void outer_add_serial(double* dW, std::size_t rows, std::size_t cols,
                      const double* g, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = dW + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

void outer_add_omp(double* dW, std::size_t rows, std::size_t cols,
                   const double* g, const double* x) {
#pragma omp parallel for schedule(static) if (rows >= kParallelThreshold)
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = dW + r * cols;
    const double gr = g[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

void outer_add(double* dW, std::size_t rows, std::size_t cols,
               const double* g, const double* x) {
  if (parallel_enabled())
    outer_add_omp(dW, rows, cols, g, x);
  else
    outer_add_serial(dW, rows, cols, g, x);
}

void adam_update_serial(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void adam_update_omp(double* p, double* m, double* v, const double* g,
                     std::size_t n, double lr, double beta1, double beta2,
                     double eps, double bc1, double bc2) {
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2) {
  if (parallel_enabled())
    adam_update_omp(p, m, v, g, n, lr, beta1, beta2, eps, bc1, bc2);
  else
    adam_update_serial(p, m, v, g, n, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace pc::kernels
