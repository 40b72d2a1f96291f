#include "kflow/convolver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "kflow/errors.hpp"

namespace kflow {

namespace {

// Spectral velocity and gradient of one field, planar re/im layout over the
// (2N+1)^2 index square.
struct LevelSpectra {
  std::vector<double> v1r, v1i, v2r, v2i;
  std::vector<double> g1r, g1i, g2r, g2i;
};

void compute_spectra(const SpectralField& w, LevelSpectra& s) {
  const TorusSpec& torus = w.torus();
  const int n = torus.trunc;
  const int e = torus.edge();
  const size_t m = static_cast<size_t>(e) * e;
  for (auto* v : {&s.v1r, &s.v1i, &s.v2r, &s.v2i, &s.g1r, &s.g1i, &s.g2r, &s.g2i})
    v->assign(m, 0.0);
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 == 0) continue;
      const size_t i = static_cast<size_t>(k1 + n) * e + (k2 + n);
      const Complex a = w.data()[i];
      if (a.real() == 0.0 && a.imag() == 0.0) continue;
      const double kx = k1;
      const double ky = k2 / torus.beta;
      const double ksq = kx * kx + ky * ky;
      const Complex u1 = Complex{0, 1} * ky * a / ksq;
      const Complex u2 = Complex{0, -1} * kx * a / ksq;
      const Complex g1 = Complex{0, 1} * kx * a;
      const Complex g2 = Complex{0, 1} * ky * a;
      s.v1r[i] = u1.real(); s.v1i[i] = u1.imag();
      s.v2r[i] = u2.real(); s.v2i[i] = u2.imag();
      s.g1r[i] = g1.real(); s.g1i[i] = g1.imag();
      s.g2r[i] = g2.real(); s.g2i[i] = g2.imag();
    }
}

// acc += v(A) . grad(B) over all coefficient pairs, on the extended
// (4N+1)^2 lattice (no truncation until crop).
void accumulate_pairs(const LevelSpectra& A, const LevelSpectra& B, int n, double* acc_r,
                      double* acc_i) {
  const int e = 2 * n + 1;
  const int ex = 4 * n + 1;
  for (int p = 0; p < e * e; ++p) {
    const double v1r = A.v1r[p], v1i = A.v1i[p];
    const double v2r = A.v2r[p], v2i = A.v2i[p];
    if (v1r == 0.0 && v1i == 0.0 && v2r == 0.0 && v2i == 0.0) continue;
    const int p1 = p / e, p2 = p % e;
    for (int q1 = 0; q1 < e; ++q1) {
      const double* g1r = &B.g1r[static_cast<size_t>(q1) * e];
      const double* g1i = &B.g1i[static_cast<size_t>(q1) * e];
      const double* g2r = &B.g2r[static_cast<size_t>(q1) * e];
      const double* g2i = &B.g2i[static_cast<size_t>(q1) * e];
      double* ar = &acc_r[static_cast<size_t>(p1 + q1) * ex + p2];
      double* ai = &acc_i[static_cast<size_t>(p1 + q1) * ex + p2];
      for (int q2 = 0; q2 < e; ++q2) {
        ar[q2] += v1r * g1r[q2] - v1i * g1i[q2] + v2r * g2r[q2] - v2i * g2i[q2];
        ai[q2] += v1r * g1i[q2] + v1i * g1r[q2] + v2r * g2i[q2] + v2i * g2r[q2];
      }
    }
  }
}

// Crop the extended lattice to |k|_inf <= N, negate, enforce Hermitian
// symmetry exactly and drop the mean.
SpectralField crop_to_field(const TorusSpec& torus, const double* acc_r, const double* acc_i) {
  const int n = torus.trunc;
  const int ex = 4 * n + 1;
  SpectralField out(torus);
  auto ext = [&](int k1, int k2) -> Complex {
    const size_t i = static_cast<size_t>(k1 + 2 * n) * ex + (k2 + 2 * n);
    return {acc_r[i], acc_i[i]};
  };
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2) {
      if (k2 == 0 && k1 <= 0) continue;
      const Complex v = 0.5 * (ext(k1, k2) + std::conj(ext(-k1, -k2)));
      out.set_pair({k1, k2}, -v);
    }
  return out;
}

int padded_grid_size(int trunc) {
  const int need = 3 * trunc + 1;
  for (int g : {12, 16, 24, 32, 48, 64, 96, 128, 192, 256, 384, 512})
    if (g >= need) return g;
  throw ConfigError("truncation too large for the padded FFT grid table");
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct FftwBufDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

struct JetConvolver::Impl {
  TorusSpec torus;
  Backend backend;
  int max_levels = 0;
  int level_count = 0;

  // Direct backend state
  std::vector<LevelSpectra> spectra;
  mutable std::vector<double> acc_r, acc_i;

  // FFT backend state: physical-space v1,v2,g1,g2 per level plus scratch
  int grid = 0;
  std::vector<std::vector<double>> phys;  // 4 grids per level, concatenated
  std::unique_ptr<double, FftwBufDeleter> real_buf;
  std::unique_ptr<fftw_complex, FftwBufDeleter> cplx_buf;
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan_c2r, plan_r2c;
  mutable std::vector<double> prod;
  mutable LevelSpectra scratch;

  Impl(TorusSpec t, int levels, Backend b) : torus(t), backend(b), max_levels(levels) {
    if (backend == Backend::Direct) {
      spectra.resize(max_levels);
      const size_t ext = static_cast<size_t>(4 * torus.trunc + 1) * (4 * torus.trunc + 1);
      acc_r.resize(ext);
      acc_i.resize(ext);
    } else {
      grid = padded_grid_size(torus.trunc);
      const size_t gg = static_cast<size_t>(grid) * grid;
      phys.assign(max_levels, {});
      prod.resize(gg);
      real_buf.reset(fftw_alloc_real(gg));
      cplx_buf.reset(fftw_alloc_complex(static_cast<size_t>(grid) * (grid / 2 + 1)));
      // FFTW_ESTIMATE keeps planning deterministic run to run.
      plan_c2r.reset(fftw_plan_dft_c2r_2d(grid, grid, cplx_buf.get(), real_buf.get(),
                                          FFTW_ESTIMATE));
      plan_r2c.reset(fftw_plan_dft_r2c_2d(grid, grid, real_buf.get(), cplx_buf.get(),
                                          FFTW_ESTIMATE));
      if (!plan_c2r || !plan_r2c) throw std::runtime_error("FFTW planning failed");
    }
  }

  // Synthesize one spectral plane (planar re/im over the index square) on the
  // physical grid via the padded c2r transform.
  void synthesize(const double* re, const double* im, double* dst) {
    const int n = torus.trunc;
    const int e = torus.edge();
    const int hc = grid / 2 + 1;
    std::memset(cplx_buf.get(), 0, sizeof(fftw_complex) * static_cast<size_t>(grid) * hc);
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = 0; k2 <= n; ++k2) {
        const size_t src = static_cast<size_t>(k1 + n) * e + (k2 + n);
        const int row = (k1 + grid) % grid;
        fftw_complex& c = cplx_buf.get()[static_cast<size_t>(row) * hc + k2];
        c[0] = re[src];
        c[1] = im[src];
      }
    fftw_execute(plan_c2r.get());
    std::memcpy(dst, real_buf.get(), sizeof(double) * static_cast<size_t>(grid) * grid);
  }

  void push(const SpectralField& w) {
    if (level_count >= max_levels) throw std::runtime_error("JetConvolver: level overflow");
    if (backend == Backend::Direct) {
      compute_spectra(w, spectra[level_count]);
    } else {
      compute_spectra(w, scratch);
      const size_t gg = static_cast<size_t>(grid) * grid;
      auto& slot = phys[level_count];
      slot.resize(4 * gg);
      synthesize(scratch.v1r.data(), scratch.v1i.data(), slot.data());
      synthesize(scratch.v2r.data(), scratch.v2i.data(), slot.data() + gg);
      synthesize(scratch.g1r.data(), scratch.g1i.data(), slot.data() + 2 * gg);
      synthesize(scratch.g2r.data(), scratch.g2i.data(), slot.data() + 3 * gg);
    }
    ++level_count;
  }

  SpectralField sum_direct(int m) const {
    std::fill(acc_r.begin(), acc_r.end(), 0.0);
    std::fill(acc_i.begin(), acc_i.end(), 0.0);
    for (int j = 0; j <= m; ++j)
      accumulate_pairs(spectra[j], spectra[m - j], torus.trunc, acc_r.data(), acc_i.data());
    return crop_to_field(torus, acc_r.data(), acc_i.data());
  }

  SpectralField sum_fft(int m) const {
    const size_t gg = static_cast<size_t>(grid) * grid;
    std::fill(prod.begin(), prod.end(), 0.0);
    for (int j = 0; j <= m; ++j) {
      const double* a = phys[j].data();
      const double* b = phys[m - j].data();
      const double* av1 = a;
      const double* av2 = a + gg;
      const double* bg1 = b + 2 * gg;
      const double* bg2 = b + 3 * gg;
      for (size_t i = 0; i < gg; ++i) prod[i] += av1[i] * bg1[i] + av2[i] * bg2[i];
    }
    std::memcpy(real_buf.get(), prod.data(), sizeof(double) * gg);
    fftw_execute(plan_r2c.get());
    const int n = torus.trunc;
    const int hc = grid / 2 + 1;
    const double scale = -1.0 / static_cast<double>(gg);
    SpectralField out(torus);
    for (int k1 = -n; k1 <= n; ++k1)
      for (int k2 = 0; k2 <= n; ++k2) {
        if (k2 == 0 && k1 <= 0) continue;
        const int row = (k1 + grid) % grid;
        const fftw_complex& c = cplx_buf.get()[static_cast<size_t>(row) * hc + k2];
        out.set_pair({k1, k2}, scale * Complex{c[0], c[1]});
      }
    return out;
  }
};

JetConvolver::JetConvolver(TorusSpec torus, int max_levels, Backend backend)
    : impl_(std::make_unique<Impl>(torus, max_levels, backend)) {}
JetConvolver::~JetConvolver() = default;
JetConvolver::JetConvolver(JetConvolver&&) noexcept = default;
JetConvolver& JetConvolver::operator=(JetConvolver&&) noexcept = default;

JetConvolver::Backend JetConvolver::pick_backend(const TorusSpec& torus) {
  return torus.trunc >= 6 ? Backend::PaddedFft : Backend::Direct;
}

const TorusSpec& JetConvolver::torus() const { return impl_->torus; }
JetConvolver::Backend JetConvolver::backend() const { return impl_->backend; }
void JetConvolver::reset() { impl_->level_count = 0; }
void JetConvolver::push_level(const SpectralField& level) { impl_->push(level); }
int JetConvolver::levels() const { return impl_->level_count; }

SpectralField JetConvolver::pair_sum(int m) const {
  if (m < 0 || m >= impl_->level_count)
    throw std::out_of_range("JetConvolver::pair_sum: level not pushed");
  return impl_->backend == Backend::Direct ? impl_->sum_direct(m) : impl_->sum_fft(m);
}

SpectralField bilinear_advection(const SpectralField& a, const SpectralField& b) {
  if (!(a.torus() == b.torus()))
    throw ConfigError("bilinear_advection: mismatched torus specs");
  const int n = a.trunc();
  LevelSpectra sa, sb;
  compute_spectra(a, sa);
  compute_spectra(b, sb);
  const size_t ext = static_cast<size_t>(4 * n + 1) * (4 * n + 1);
  std::vector<double> acc_r(ext, 0.0), acc_i(ext, 0.0);
  accumulate_pairs(sa, sb, n, acc_r.data(), acc_i.data());
  return crop_to_field(a.torus(), acc_r.data(), acc_i.data());
}

}  // namespace kflow
