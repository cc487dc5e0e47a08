#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace shallowbound {

/// Source nodes streamed by the kernels: coordinates and quadrature weights.
struct SourceView {
  const double* x;
  const double* y;
  const double* w;
  std::size_t n;
};

/// Inner loops of the logarithmic-potential and resolvent assembly.  Each
/// entry has a scalar reference and, when the CPU allows, an AVX2 variant;
/// both accumulate in a fixed order so results do not depend on threading.
/// Coincident source/target pairs (r = 0) contribute nothing.
struct KernelTable {
  const char* name;

  /// out[j] = w_j ln|t - y_j|.
  void (*log_row)(double tx, double ty, const SourceView& src, double* out);

  /// out[0..1] = sum w ln r * g (re, im);
  /// out[2..7] = sum w ln r * (y - p)^alpha for the six Taylor monomials.
  void (*log_sums)(double tx, double ty, double px, double py, const SourceView& src, const double* g_re,
                   const double* g_im, double* out);

  /// out[0..3] = sum w (t - y)_{1,2} / r^2 * g as (x re, x im, y re, y im);
  /// out[4..9] and out[10..15] = the same kernel against the six monomials,
  /// x then y component.
  void (*grad_sums)(double tx, double ty, double px, double py, const SourceView& src, const double* g_re,
                    const double* g_im, double* out);

  /// out[j] = w_j (P_c(r^2) - ln r * P_b(r^2)), with complex polynomials
  /// P(s) = sum_{m=1}^{terms} coef[m-1] s^m.
  void (*shallow_row)(double tx, double ty, const SourceView& src, const double* b_re, const double* b_im,
                      const double* c_re, const double* c_im, int terms, double* out_re, double* out_im);
};

const KernelTable& scalar_kernels();
/// nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_kernels();

/// Kernels selected by SHALLOWBOUND_SIMD (auto | scalar | avx2), read once.
const KernelTable& kernels();

/// Runs body(begin, end) over [0, n) on up to max_threads() workers.  Each
/// index is handled by exactly one call, so per-index work stays
/// deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Runs task(i) for i in [0, n), each index on one worker, coarse-grained
/// (one task per scenario or eps).  Inside a worker, both this and
/// parallel_for run serially.
void parallel_tasks(std::size_t n, const std::function<void(std::size_t)>& task);

/// Worker cap: SHALLOWBOUND_THREADS if set and positive, else the hardware
/// concurrency.
unsigned max_threads();

}  // namespace shallowbound
