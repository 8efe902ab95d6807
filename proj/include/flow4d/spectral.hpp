// Copyright 2026 flow4d contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "flow4d/errors.hpp"
#include "flow4d/parallel.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

/// Energy spectrum of one voxel's time series over the strictly positive
/// temporal frequencies. Frequencies are harmonic indices f_i = i (cycles
/// per cardiac cycle): the cycle is the natural period of the data, and a
/// positive linear rescaling of the frequency axis is irrelevant after
/// min-max normalization downstream. Works with or without frame_duration.
struct Spectrum {
  Eigen::ArrayXd energies;  // |DFT coefficient|^2 per bin, (m/s)^2 units
  Eigen::ArrayXd freqs;     // 1, 2, ..., n

  int binCount() const { return int(energies.size()); }
};

/// Strictly positive bin count for T samples: floor(T/2). DC and negative
/// frequencies are excluded; for even T the Nyquist bin appears once.
inline int positiveBinCount(int n_samples) { return n_samples / 2; }

/// Σ E_i below which a spectrum is treated as empty (no pulsatile energy),
/// relative to the representable signal power venc^2 accumulated over T
/// samples.
inline double defaultEnergyEpsilon(int n_samples, double venc) {
  return 1e-12 * double(n_samples) * venc * venc;
}

/// Tabulated basis of the real-input temporal DFT for a fixed series length.
/// Cardiac series are short (T of order tens), so the transform is evaluated
/// as plain dot products against precomputed cos/sin rows with a fixed
/// accumulation order; results are identical no matter how callers chunk or
/// parallelize the surrounding volume.
class SpectralBasis {
 public:
  explicit SpectralBasis(int n_samples) : t_(n_samples) {
    if (n_samples < 2)
      throw ValidationError("degenerate series: need at least 2 samples, got " +
                            std::to_string(n_samples));
    n_ = positiveBinCount(n_samples);
    cos_.resize(t_, n_);
    sin_.resize(t_, n_);
    // One period of the unit twiddle; basis entries index it by (i*k) mod T
    // so exactly periodic angles stay exactly periodic.
    Eigen::ArrayXd tw_cos(t_), tw_sin(t_);
    for (int m = 0; m < t_; ++m) {
      const double angle = 2.0 * M_PI * double(m) / double(t_);
      tw_cos[m] = std::cos(angle);
      tw_sin[m] = std::sin(angle);
    }
    for (int i = 1; i <= n_; ++i) {
      for (int k = 0; k < t_; ++k) {
        const int m = int((std::int64_t(i) * k) % t_);
        cos_(k, i - 1) = tw_cos[m];
        sin_(k, i - 1) = tw_sin[m];
      }
    }
  }

  int sampleCount() const { return t_; }
  int binCount() const { return n_; }

  /// Energies |DFT_i|^2 for bins i = 1..n. `samples` points at t_ contiguous
  /// doubles, `out` at n_ doubles.
  void energies(const double* samples, double* out) const {
    for (int i = 0; i < n_; ++i) {
      const double* c = cos_.col(i).data();
      const double* s = sin_.col(i).data();
      double re = 0.0;
      double im = 0.0;
      for (int k = 0; k < t_; ++k) {
        re += samples[k] * c[k];
        im += samples[k] * s[k];
      }
      out[i] = re * re + im * im;
    }
  }

 private:
  int t_ = 0;
  int n_ = 0;
  Eigen::MatrixXd cos_;  // t_ x n_, column i-1 = bin i
  Eigen::MatrixXd sin_;
};

/// Energy spectrum of a real time series of length T >= 2.
template <typename Derived>
Spectrum energySpectrum(const Eigen::DenseBase<Derived>& samples) {
  const int t = int(samples.size());
  if (t < 2)
    throw ValidationError("degenerate series: need at least 2 samples, got " +
                          std::to_string(t));
  Eigen::ArrayXd buf(t);
  for (int k = 0; k < t; ++k) {
    buf[k] = double(samples.derived()(k));
    if (!std::isfinite(buf[k]))
      throw ValidationError("invalid input: non-finite sample at index " +
                            std::to_string(k));
  }
  const SpectralBasis basis(t);
  Spectrum spec;
  spec.energies.resize(basis.binCount());
  spec.freqs = Eigen::ArrayXd::LinSpaced(basis.binCount(), 1.0,
                                         double(basis.binCount()));
  basis.energies(buf.data(), spec.energies.data());
  return spec;
}

/// Energy-weighted mean of the strictly positive frequencies:
///   Σ E_i f_i / Σ E_i.
/// When the total energy is at or below eps_energy the voxel carries no
/// pulsatile signal and the highest frequency f_n is returned, which is the
/// value noise-dominated voxels converge to.
inline double wmfScalar(const Spectrum& spec, double eps_energy = 0.0) {
  const int n = spec.binCount();
  if (n < 1 || spec.freqs.size() != n)
    throw ValidationError("invalid spectrum: empty or mismatched bins");
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += spec.energies[i] * spec.freqs[i];
    den += spec.energies[i];
  }
  if (den <= eps_energy) return spec.freqs[n - 1];
  return std::clamp(num / den, spec.freqs[0], spec.freqs[n - 1]);
}

namespace detail {

/// Shared per-voxel kernel of the volume path: energies then weighted mean,
/// same fixed order as the scalar API.
inline double wmfFromSamples(const SpectralBasis& basis, const double* samples,
                             double* energy_buf, double eps_energy) {
  basis.energies(samples, energy_buf);
  const int n = basis.binCount();
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += energy_buf[i] * double(i + 1);
    den += energy_buf[i];
  }
  if (den <= eps_energy) return double(n);
  return std::clamp(num / den, 1.0, double(n));
}

}  // namespace detail

/// Voxel-wise WMF of one velocity component (0 = u, 1 = v, 2 = w).
/// output(j) = wmfScalar(energySpectrum(time series at j)); range [1, T/2].
/// Voxel results are independent, so the computation parallelizes over
/// voxel chunks without changing a single bit of the output.
template <typename Scalar>
FeatureVolume<Scalar> wmfComponent(const VelocitySeries<Scalar>& series,
                                   int component, int threads = 1) {
  if (component < 0 || component > 2)
    throw ValidationError("component index must be 0, 1 or 2");
  if (auto v = metaViolations(series.meta); !v.empty())
    throw ValidationError("invalid series meta: " + v.front());
  const auto& field = series.components[size_t(component)];
  if (field.size() != series.meta.numSamples())
    throw ValidationError("component field size does not match meta");

  const Index nvox = series.meta.numVoxels();
  const int t_count = series.meta.n_frames;
  const double eps = defaultEnergyEpsilon(t_count, series.meta.venc);
  const SpectralBasis basis(t_count);

  FeatureVolume<Scalar> out;
  out.meta = series.meta;
  out.kind = component == 0   ? FeatureKind::WmfU
             : component == 1 ? FeatureKind::WmfV
                              : FeatureKind::WmfW;
  out.normalized = false;
  out.values.resize(nvox);

  constexpr Index kChunk = 2048;
  parallelChunks(nvox, kChunk, threads, [&](Index begin, Index end) {
    const Index width = end - begin;
    // Gather the chunk's time series into a (T x width) block: one strided
    // frame copy per t, then each voxel's series is a contiguous column.
    Eigen::MatrixXd block(t_count, width);
    for (int t = 0; t < t_count; ++t) {
      const Scalar* src = field.data() + Index(t) * nvox + begin;
      for (Index j = 0; j < width; ++j) block(t, j) = double(src[j]);
    }
    if (!block.allFinite()) {
      for (Index j = 0; j < width; ++j)
        for (int t = 0; t < t_count; ++t)
          if (!std::isfinite(block(t, j))) {
            const auto c = series.meta.coords(begin + j);
            throw ValidationError(
                "invalid input: non-finite velocity sample at voxel (" +
                std::to_string(c[0]) + ", " + std::to_string(c[1]) + ", " +
                std::to_string(c[2]) + "), frame " + std::to_string(t));
          }
    }
    Eigen::ArrayXd energy_buf(basis.binCount());
    for (Index j = 0; j < width; ++j) {
      out.values[begin + j] = Scalar(detail::wmfFromSamples(
          basis, block.col(j).data(), energy_buf.data(), eps));
    }
  });
  return out;
}

/// Voxel-wise minimum of the three per-component WMF volumes: the fused
/// feature. Low wherever at least one component saw pulsatile energy.
template <typename Scalar>
FeatureVolume<Scalar> wmfMin(const FeatureVolume<Scalar>& a,
                             const FeatureVolume<Scalar>& b,
                             const FeatureVolume<Scalar>& c) {
  const FeatureVolume<Scalar>* inputs[3] = {&a, &b, &c};
  for (const auto* f : inputs) {
    if (!f->meta.sameShape(a.meta) || f->meta.n_frames != a.meta.n_frames)
      throw ValidationError("wmfMin: inputs do not share a grid");
    if (f->normalized)
      throw ValidationError("wmfMin: inputs must be unnormalized WMF volumes");
    if (f->kind != FeatureKind::WmfU && f->kind != FeatureKind::WmfV &&
        f->kind != FeatureKind::WmfW)
      throw ValidationError("wmfMin: inputs must be component WMF volumes");
    if (f->values.size() != f->meta.numVoxels())
      throw ValidationError("wmfMin: value size does not match meta");
  }
  FeatureVolume<Scalar> out;
  out.meta = a.meta;
  out.kind = FeatureKind::WmfMin;
  out.normalized = false;
  out.values = a.values.min(b.values).min(c.values);
  return out;
}

}  // namespace flow4d
