#include "sgid/kernels.hpp"

#include <atomic>
#include <limits>

#include <omp.h>

namespace sgid::kernels {

namespace {

std::atomic<std::size_t> g_threshold{1u << 14};

inline double apply(BinaryOp op, double x, double y, bool& bad) {
  switch (op) {
    case BinaryOp::multiply: return x * y;
    case BinaryOp::divide_strict:
      if (y == 0.0) {
        bad = true;
        return 0.0;
      }
      return x / y;
    case BinaryOp::divide_allow_zeros:
      if (y == 0.0) {
        if (x != 0.0) bad = true;
        return 0.0;
      }
      return x / y;
  }
  return 0.0;
}

struct Kahan {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

std::size_t cell_count(const Cards& cards) {
  std::size_t n = 1;
  for (auto c : cards) n *= c;
  return n;
}

void set_parallel_threshold(std::size_t cells) { g_threshold = cells; }
std::size_t parallel_threshold() { return g_threshold; }

CombineResult combine_serial(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                             const double* b, BinaryOp op) {
  const std::size_t n = cell_count(cards);
  const std::size_t dims = cards.size();
  CombineResult r;
  r.values.resize(n);
  std::vector<std::size_t> digit(dims, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool bad = false;
    r.values[i] = apply(op, a[ia], b[ib], bad);
    if (bad && r.bad_cell < 0) r.bad_cell = static_cast<std::ptrdiff_t>(i);
    // Odometer increment, last dimension fastest.
    for (std::size_t d = dims; d-- > 0;) {
      if (++digit[d] < cards[d]) {
        ia += sa[d];
        ib += sb[d];
        break;
      }
      digit[d] = 0;
      ia -= sa[d] * (cards[d] - 1);
      ib -= sb[d] * (cards[d] - 1);
    }
  }
  return r;
}

CombineResult combine_omp(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                          const double* b, BinaryOp op) {
  const auto n = static_cast<std::ptrdiff_t>(cell_count(cards));
  const std::size_t dims = cards.size();
  CombineResult r;
  r.values.resize(static_cast<std::size_t>(n));
  std::ptrdiff_t first_bad = std::numeric_limits<std::ptrdiff_t>::max();
#pragma omp parallel reduction(min : first_bad)
  {
    // Each thread decodes the start of its contiguous slice once, then walks
    // it with the same odometer as the serial kernel.
    const auto threads = static_cast<std::ptrdiff_t>(omp_get_num_threads());
    const auto t = static_cast<std::ptrdiff_t>(omp_get_thread_num());
    const std::ptrdiff_t lo = n * t / threads, hi = n * (t + 1) / threads;
    std::vector<std::size_t> digit(dims, 0);
    std::size_t rest = static_cast<std::size_t>(lo), ia = 0, ib = 0;
    for (std::size_t d = dims; d-- > 0;) {
      digit[d] = rest % cards[d];
      rest /= cards[d];
      ia += digit[d] * sa[d];
      ib += digit[d] * sb[d];
    }
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
      bool bad = false;
      r.values[static_cast<std::size_t>(i)] = apply(op, a[ia], b[ib], bad);
      if (bad && i < first_bad) first_bad = i;
      for (std::size_t d = dims; d-- > 0;) {
        if (++digit[d] < cards[d]) {
          ia += sa[d];
          ib += sb[d];
          break;
        }
        digit[d] = 0;
        ia -= sa[d] * (cards[d] - 1);
        ib -= sb[d] * (cards[d] - 1);
      }
    }
  }
  if (first_bad != std::numeric_limits<std::ptrdiff_t>::max()) r.bad_cell = first_bad;
  return r;
}

std::vector<double> sum_out_serial(const Cards& cards, const std::vector<bool>& keep, const double* in) {
  const std::size_t dims = cards.size();
  Strides out_stride(dims, 0);
  std::size_t out_n = 1;
  for (std::size_t d = dims; d-- > 0;) {
    if (keep[d]) {
      out_stride[d] = out_n;
      out_n *= cards[d];
    }
  }
  std::vector<Kahan> acc(out_n);
  const std::size_t n = cell_count(cards);
  std::vector<std::size_t> digit(dims, 0);
  std::size_t o = 0;
  for (std::size_t i = 0; i < n; ++i) {
    acc[o].add(in[i]);
    for (std::size_t d = dims; d-- > 0;) {
      if (++digit[d] < cards[d]) {
        o += out_stride[d];
        break;
      }
      digit[d] = 0;
      o -= out_stride[d] * (cards[d] - 1);
    }
  }
  std::vector<double> out(out_n);
  for (std::size_t i = 0; i < out_n; ++i) out[i] = acc[i].sum;
  return out;
}

std::vector<double> sum_out_omp(const Cards& cards, const std::vector<bool>& keep, const double* in) {
  const std::size_t dims = cards.size();
  Strides in_stride(dims);
  {
    std::size_t s = 1;
    for (std::size_t d = dims; d-- > 0;) {
      in_stride[d] = s;
      s *= cards[d];
    }
  }
  Cards kept_cards, summed_cards;
  Strides kept_stride, summed_stride;
  for (std::size_t d = 0; d < dims; ++d) {
    if (keep[d]) {
      kept_cards.push_back(cards[d]);
      kept_stride.push_back(in_stride[d]);
    } else {
      summed_cards.push_back(cards[d]);
      summed_stride.push_back(in_stride[d]);
    }
  }
  const auto out_n = static_cast<std::ptrdiff_t>(cell_count(kept_cards));
  const std::size_t inner = cell_count(summed_cards);
  std::vector<double> out(static_cast<std::size_t>(out_n));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < out_n; ++o) {
    std::size_t rest = static_cast<std::size_t>(o), base = 0;
    for (std::size_t d = kept_cards.size(); d-- > 0;) {
      base += (rest % kept_cards[d]) * kept_stride[d];
      rest /= kept_cards[d];
    }
    Kahan acc;
    std::vector<std::size_t> digit(summed_cards.size(), 0);
    std::size_t off = 0;
    for (std::size_t k = 0; k < inner; ++k) {
      acc.add(in[base + off]);
      for (std::size_t d = summed_cards.size(); d-- > 0;) {
        if (++digit[d] < summed_cards[d]) {
          off += summed_stride[d];
          break;
        }
        digit[d] = 0;
        off -= summed_stride[d] * (summed_cards[d] - 1);
      }
    }
    out[static_cast<std::size_t>(o)] = acc.sum;
  }
  return out;
}

CombineResult combine(const Cards& cards, const Strides& sa, const double* a, const Strides& sb,
                      const double* b, BinaryOp op) {
  if (cell_count(cards) >= g_threshold && omp_get_max_threads() > 1)
    return combine_omp(cards, sa, a, sb, b, op);
  return combine_serial(cards, sa, a, sb, b, op);
}

std::vector<double> sum_out(const Cards& cards, const std::vector<bool>& keep, const double* in) {
  if (cell_count(cards) >= g_threshold && omp_get_max_threads() > 1) return sum_out_omp(cards, keep, in);
  return sum_out_serial(cards, keep, in);
}

}  // namespace sgid::kernels
