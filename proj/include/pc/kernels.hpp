#pragma once

#include <cstddef>

// Dense inner loops used by the forward/backward passes and the optimizer.
// Each kernel exists in a serial reference form and an OpenMP form. The
// OpenMP variants parallelize only across independent output elements, so
// every element is accumulated in the same order as the serial code and the
// results are bit-identical. tools/bench_kernels compares the two.
namespace pc::kernels {

bool parallel_enabled();
void set_parallel(bool on);

// y = W x, W row-major rows x cols.
void matvec_serial(const double* W, std::size_t rows, std::size_t cols,
                   const double* x, double* y);
void matvec_omp(const double* W, std::size_t rows, std::size_t cols,
                const double* x, double* y);
void matvec(const double* W, std::size_t rows, std::size_t cols,
            const double* x, double* y);

// dx += W^T g. Parallel over columns.
void matvec_tadd_serial(const double* W, std::size_t rows, std::size_t cols,
                        const double* g, double* dx);
void matvec_tadd_omp(const double* W, std::size_t rows, std::size_t cols,
                     const double* g, double* dx);
void matvec_tadd(const double* W, std::size_t rows, std::size_t cols,
                 const double* g, double* dx);

// dW += g x^T. Parallel over rows.
void outer_add_serial(double* dW, std::size_t rows, std::size_t cols,
                      const double* g, const double* x);
void outer_add_omp(double* dW, std::size_t rows, std::size_t cols,
                   const double* g, const double* x);
void outer_add(double* dW, std::size_t rows, std::size_t cols,
               const double* g, const double* x);

// One Adam update over a flat parameter array. bc1/bc2 are the
// bias-correction denominators (1 - beta^t), precomputed by the caller.
void adam_update_serial(double* p, double* m, double* v, const double* g,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double bc1, double bc2);
void adam_update_omp(double* p, double* m, double* v, const double* g,
                     std::size_t n, double lr, double beta1, double beta2,
                     double eps, double bc1, double bc2);
void adam_update(double* p, double* m, double* v, const double* g,
                 std::size_t n, double lr, double beta1, double beta2,
                 double eps, double bc1, double bc2);

}  // namespace pc::kernels
