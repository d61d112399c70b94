#pragma once

#include <cstddef>
#include <vector>

// Dense table kernels behind the factor algebra. Tables are row-major over
// `cards` with the last dimension varying fastest. Each kernel has a serial
// reference and an OpenMP version; both visit the summands of every output
// cell in the same order, so their results are bit-identical.
namespace sgid::kernels {

using Cards = std::vector<std::size_t>;
using Strides = std::vector<std::size_t>;

enum class BinaryOp { multiply, divide_strict, divide_allow_zeros };

struct CombineResult {
  std::vector<double> values;
  /// Lowest output cell where division was undefined, or -1.
  std::ptrdiff_t bad_cell = -1;
};

/// out[i] = a[i·sa] op b[i·sb], where `sa`/`sb` give, per output dimension, the
/// stride into the operand (0 when the operand lacks that dimension).
CombineResult combine_serial(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                             const double* b, BinaryOp op);
CombineResult combine_omp(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                          const double* b, BinaryOp op);

/// Sums out every dimension with keep[d] == false using compensated summation.
std::vector<double> sum_out_serial(const Cards& cards, const std::vector<bool>& keep, const double* in);
std::vector<double> sum_out_omp(const Cards& cards, const std::vector<bool>& keep, const double* in);

/// Dispatchers used by the factor code: OpenMP above the cell threshold.
CombineResult combine(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                      const double* b, BinaryOp op);
std::vector<double> sum_out(const Cards& cards, const std::vector<bool>& keep, const double* in);

void set_parallel_threshold(std::size_t cells);
std::size_t parallel_threshold();

std::size_t cell_count(const Cards& cards);

}  // namespace sgid::kernels
