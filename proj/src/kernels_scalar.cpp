#include <cmath>

#include "shallowbound/kernels.hpp"

namespace shallowbound {

namespace {

void log_row(double tx, double ty, const SourceView& s, double* out) {
  for (std::size_t j = 0; j < s.n; ++j) {
    const double dx = s.x[j] - tx, dy = s.y[j] - ty;
    const double rho = dx * dx + dy * dy;
    out[j] = rho > 0.0 ? 0.5 * std::log(rho) * s.w[j] : 0.0;
  }
}

void log_sums(double tx, double ty, double px, double py, const SourceView& s, const double* gre,
              const double* gim, double* out) {
  double a[8] = {};
  for (std::size_t j = 0; j < s.n; ++j) {
    const double dx = s.x[j] - tx, dy = s.y[j] - ty;
    const double rho = dx * dx + dy * dy;
    if (!(rho > 0.0)) continue;
    const double l = 0.5 * std::log(rho) * s.w[j];
    const double ux = s.x[j] - px, uy = s.y[j] - py;
    a[0] += l * gre[j];
    a[1] += l * gim[j];
    a[2] += l;
    a[3] += l * ux;
    a[4] += l * uy;
    a[5] += l * ux * ux;
    a[6] += l * ux * uy;
    a[7] += l * uy * uy;
  }
  for (int k = 0; k < 8; ++k) out[k] = a[k];
}

void grad_sums(double tx, double ty, double px, double py, const SourceView& s, const double* gre,
               const double* gim, double* out) {
  double a[16] = {};
  for (std::size_t j = 0; j < s.n; ++j) {
    const double dx = tx - s.x[j], dy = ty - s.y[j];
    const double rho = dx * dx + dy * dy;
    if (!(rho > 0.0)) continue;
    const double inv = s.w[j] / rho;
    const double kx = dx * inv, ky = dy * inv;
    const double ux = s.x[j] - px, uy = s.y[j] - py;
    const double m[6] = {1.0, ux, uy, ux * ux, ux * uy, uy * uy};
    a[0] += kx * gre[j];
    a[1] += kx * gim[j];
    a[2] += ky * gre[j];
    a[3] += ky * gim[j];
    for (int k = 0; k < 6; ++k) {
      a[4 + k] += kx * m[k];
      a[10 + k] += ky * m[k];
    }
  }
  for (int k = 0; k < 16; ++k) out[k] = a[k];
}

void shallow_row(double tx, double ty, const SourceView& s, const double* bre, const double* bim,
                 const double* cre, const double* cim, int terms, double* out_re, double* out_im) {
  for (std::size_t j = 0; j < s.n; ++j) {
    const double dx = s.x[j] - tx, dy = s.y[j] - ty;
    const double rho = dx * dx + dy * dy;
    if (!(rho > 0.0)) {
      out_re[j] = out_im[j] = 0.0;
      continue;
    }
    double pbr = 0.0, pbi = 0.0, pcr = 0.0, pci = 0.0;
    for (int m = terms - 1; m >= 0; --m) {
      pbr = pbr * rho + bre[m];
      pbi = pbi * rho + bim[m];
      pcr = pcr * rho + cre[m];
      pci = pci * rho + cim[m];
    }
    pbr *= rho;
    pbi *= rho;
    pcr *= rho;
    pci *= rho;
    const double lr = 0.5 * std::log(rho);
    out_re[j] = s.w[j] * (pcr - lr * pbr);
    out_im[j] = s.w[j] * (pci - lr * pbi);
  }
}

const KernelTable table{"scalar", log_row, log_sums, grad_sums, shallow_row};

}  // namespace

const KernelTable& scalar_kernels() { return table; }

}  // namespace shallowbound
