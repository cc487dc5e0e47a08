#include <immintrin.h>

#include "shallowbound/kernels.hpp"

namespace shallowbound {

namespace {

// Natural log of four positive normal doubles (Cephes rational form).
inline __m256d log_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i ebits = _mm256_srli_epi64(bits, 52);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                                                   _mm256_set1_epi64x(0x3FE0000000000000LL)));
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(ebits, _mm256_castpd_si256(two52))),
                            _mm256_add_pd(two52, _mm256_set1_pd(1022.0)));
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  const __m256d t = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);
  const __m256d z = _mm256_mul_pd(t, t);

  __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(4.97494994976747001425E-1));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(4.70579119878881725854E0));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.44989225341610930846E1));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(1.79368678507819816313E1));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(7.70838733755885391666E0));

  __m256d q = _mm256_add_pd(t, _mm256_set1_pd(1.12873587189167450590E1));
  q = _mm256_fmadd_pd(q, t, _mm256_set1_pd(4.52279145837532221105E1));
  q = _mm256_fmadd_pd(q, t, _mm256_set1_pd(8.29875266912776603211E1));
  q = _mm256_fmadd_pd(q, t, _mm256_set1_pd(7.11544750618563894466E1));
  q = _mm256_fmadd_pd(q, t, _mm256_set1_pd(2.31251620126765340583E1));

  __m256d y = _mm256_mul_pd(_mm256_mul_pd(t, z), _mm256_div_pd(p, q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d r = _mm256_add_pd(t, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
}

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v), hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

SourceView tail(const SourceView& s, std::size_t from) {
  return {s.x + from, s.y + from, s.w + from, s.n - from};
}

void log_row(double tx, double ty, const SourceView& s, double* out) {
  const __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty), half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= s.n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(s.x + j), vtx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(s.y + j), vty);
    __m256d rho = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d live = _mm256_cmp_pd(rho, zero, _CMP_GT_OQ);
    __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), rho, live);
    __m256d l = _mm256_mul_pd(_mm256_mul_pd(half, log_pd(safe)), _mm256_loadu_pd(s.w + j));
    _mm256_storeu_pd(out + j, _mm256_and_pd(l, live));
  }
  if (j < s.n) scalar_kernels().log_row(tx, ty, tail(s, j), out + j);
}

void log_sums(double tx, double ty, double px, double py, const SourceView& s, const double* gre,
              const double* gim, double* out) {
  const __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty);
  const __m256d vpx = _mm256_set1_pd(px), vpy = _mm256_set1_pd(py);
  const __m256d half = _mm256_set1_pd(0.5), zero = _mm256_setzero_pd();
  __m256d a[8];
  for (auto& v : a) v = zero;
  std::size_t j = 0;
  for (; j + 4 <= s.n; j += 4) {
    __m256d xs = _mm256_loadu_pd(s.x + j), ys = _mm256_loadu_pd(s.y + j);
    __m256d dx = _mm256_sub_pd(xs, vtx), dy = _mm256_sub_pd(ys, vty);
    __m256d rho = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d live = _mm256_cmp_pd(rho, zero, _CMP_GT_OQ);
    __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), rho, live);
    __m256d l = _mm256_and_pd(_mm256_mul_pd(_mm256_mul_pd(half, log_pd(safe)), _mm256_loadu_pd(s.w + j)), live);
    __m256d ux = _mm256_sub_pd(xs, vpx), uy = _mm256_sub_pd(ys, vpy);
    __m256d lx = _mm256_mul_pd(l, ux), ly = _mm256_mul_pd(l, uy);
    a[0] = _mm256_fmadd_pd(l, _mm256_loadu_pd(gre + j), a[0]);
    a[1] = _mm256_fmadd_pd(l, _mm256_loadu_pd(gim + j), a[1]);
    a[2] = _mm256_add_pd(a[2], l);
    a[3] = _mm256_add_pd(a[3], lx);
    a[4] = _mm256_add_pd(a[4], ly);
    a[5] = _mm256_fmadd_pd(lx, ux, a[5]);
    a[6] = _mm256_fmadd_pd(lx, uy, a[6]);
    a[7] = _mm256_fmadd_pd(ly, uy, a[7]);
  }
  double t[8] = {};
  if (j < s.n) scalar_kernels().log_sums(tx, ty, px, py, tail(s, j), gre + j, gim + j, t);
  for (int k = 0; k < 8; ++k) out[k] = hsum(a[k]) + t[k];
}

void grad_sums(double tx, double ty, double px, double py, const SourceView& s, const double* gre,
               const double* gim, double* out) {
  const __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty);
  const __m256d vpx = _mm256_set1_pd(px), vpy = _mm256_set1_pd(py);
  const __m256d zero = _mm256_setzero_pd();
  __m256d a[16];
  for (auto& v : a) v = zero;
  std::size_t j = 0;
  for (; j + 4 <= s.n; j += 4) {
    __m256d xs = _mm256_loadu_pd(s.x + j), ys = _mm256_loadu_pd(s.y + j);
    __m256d dx = _mm256_sub_pd(vtx, xs), dy = _mm256_sub_pd(vty, ys);
    __m256d rho = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d live = _mm256_cmp_pd(rho, zero, _CMP_GT_OQ);
    __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), rho, live);
    __m256d inv = _mm256_and_pd(_mm256_div_pd(_mm256_loadu_pd(s.w + j), safe), live);
    __m256d kx = _mm256_mul_pd(dx, inv), ky = _mm256_mul_pd(dy, inv);
    __m256d ux = _mm256_sub_pd(xs, vpx), uy = _mm256_sub_pd(ys, vpy);
    __m256d gr = _mm256_loadu_pd(gre + j), gi = _mm256_loadu_pd(gim + j);
    a[0] = _mm256_fmadd_pd(kx, gr, a[0]);
    a[1] = _mm256_fmadd_pd(kx, gi, a[1]);
    a[2] = _mm256_fmadd_pd(ky, gr, a[2]);
    a[3] = _mm256_fmadd_pd(ky, gi, a[3]);
    const __m256d m[6] = {_mm256_set1_pd(1.0), ux, uy, _mm256_mul_pd(ux, ux), _mm256_mul_pd(ux, uy),
                          _mm256_mul_pd(uy, uy)};
    for (int k = 0; k < 6; ++k) {
      a[4 + k] = _mm256_fmadd_pd(kx, m[k], a[4 + k]);
      a[10 + k] = _mm256_fmadd_pd(ky, m[k], a[10 + k]);
    }
  }
  double t[16] = {};
  if (j < s.n) scalar_kernels().grad_sums(tx, ty, px, py, tail(s, j), gre + j, gim + j, t);
  for (int k = 0; k < 16; ++k) out[k] = hsum(a[k]) + t[k];
}

void shallow_row(double tx, double ty, const SourceView& s, const double* bre, const double* bim,
                 const double* cre, const double* cim, int terms, double* out_re, double* out_im) {
  const __m256d vtx = _mm256_set1_pd(tx), vty = _mm256_set1_pd(ty);
  const __m256d half = _mm256_set1_pd(0.5), zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= s.n; j += 4) {
    __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(s.x + j), vtx);
    __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(s.y + j), vty);
    __m256d rho = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    __m256d live = _mm256_cmp_pd(rho, zero, _CMP_GT_OQ);
    __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), rho, live);
    __m256d pbr = zero, pbi = zero, pcr = zero, pci = zero;
    for (int m = terms - 1; m >= 0; --m) {
      pbr = _mm256_fmadd_pd(pbr, rho, _mm256_set1_pd(bre[m]));
      pbi = _mm256_fmadd_pd(pbi, rho, _mm256_set1_pd(bim[m]));
      pcr = _mm256_fmadd_pd(pcr, rho, _mm256_set1_pd(cre[m]));
      pci = _mm256_fmadd_pd(pci, rho, _mm256_set1_pd(cim[m]));
    }
    pbr = _mm256_mul_pd(pbr, rho);
    pbi = _mm256_mul_pd(pbi, rho);
    pcr = _mm256_mul_pd(pcr, rho);
    pci = _mm256_mul_pd(pci, rho);
    __m256d lr = _mm256_mul_pd(half, log_pd(safe));
    __m256d w = _mm256_and_pd(_mm256_loadu_pd(s.w + j), live);
    _mm256_storeu_pd(out_re + j, _mm256_mul_pd(w, _mm256_fnmadd_pd(lr, pbr, pcr)));
    _mm256_storeu_pd(out_im + j, _mm256_mul_pd(w, _mm256_fnmadd_pd(lr, pbi, pci)));
  }
  if (j < s.n)
    scalar_kernels().shallow_row(tx, ty, tail(s, j), bre, bim, cre, cim, terms, out_re + j, out_im + j);
}

const KernelTable table{"avx2", log_row, log_sums, grad_sums, shallow_row};

}  // namespace

const KernelTable* avx2_kernels() {
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &table : nullptr;
}

}  // namespace shallowbound
