#pragma once

#include <memory>

#include "kflow/spectral_field.hpp"

namespace kflow {

// Reference evaluation of the advection bilinear form
//   B(a, b) = -P_N[ v(a) . grad b ]
// by direct (exact Galerkin) convolution over coefficient pairs.
SpectralField bilinear_advection(const SpectralField& a, const SpectralField& b);

// Caches per-level velocity/gradient data of a Taylor jet and evaluates
//   pair_sum(m) = sum_{j=0..m} B(u_j, u_{m-j}).
// The PaddedFft backend computes the same truncated convolution on a grid
// of size >= 3N+1 (alias-free, i.e. sharper than the 2/3 rule) and agrees
// with Direct to roundoff.
class JetConvolver {
 public:
  enum class Backend { Direct, PaddedFft };

  JetConvolver(TorusSpec torus, int max_levels, Backend backend);
  ~JetConvolver();
  JetConvolver(JetConvolver&&) noexcept;
  JetConvolver& operator=(JetConvolver&&) noexcept;
  JetConvolver(const JetConvolver&) = delete;
  JetConvolver& operator=(const JetConvolver&) = delete;

  // Direct convolution wins below this truncation; FFT above.
  static Backend pick_backend(const TorusSpec& torus);

  const TorusSpec& torus() const;
  Backend backend() const;

  void reset();
  void push_level(const SpectralField& level);
  int levels() const;
  SpectralField pair_sum(int m) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kflow
