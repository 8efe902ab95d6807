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

#include <ostream>
#include <string>

#include "flow4d/errors.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

/// The fixed catalogue of threshold-segmentation features. InvWmf is the
/// plain inverted WMF (fluid is low-WMF, so 1 - WMF puts it on top); the
/// rest combine the normalized WMF with the magnitude frame or PC-MRA.
enum class CombinationId {
  InvWmf,         // 1 - WMF
  MagXInvWmf8,    // Mag(t) * (1 - WMF)^8
  MagDivWmf,      // Mag(t) / WMF
  MagDivWmf2,     // Mag(t) / WMF^2
  PcmraDivWmf,    // PC-MRA(t) / WMF
  PcmraDivWmf2,   // PC-MRA(t) / WMF^2
  PcmraT,         // PC-MRA(t)
  PcmraSys,       // PC-MRA(sys)
};

inline const char* to_string(CombinationId id) {
  switch (id) {
    case CombinationId::InvWmf: return "inv_wmf";
    case CombinationId::MagXInvWmf8: return "mag_x_invwmf8";
    case CombinationId::MagDivWmf: return "mag_div_wmf";
    case CombinationId::MagDivWmf2: return "mag_div_wmf2";
    case CombinationId::PcmraDivWmf: return "pcmra_div_wmf";
    case CombinationId::PcmraDivWmf2: return "pcmra_div_wmf2";
    case CombinationId::PcmraT: return "pcmra_t";
    case CombinationId::PcmraSys: return "pcmra_sys";
  }
  return "unknown";
}

inline std::ostream& operator<<(std::ostream& os, CombinationId id) {
  return os << to_string(id);
}

inline CombinationId combinationFromString(const std::string& s) {
  for (CombinationId id :
       {CombinationId::InvWmf, CombinationId::MagXInvWmf8,
        CombinationId::MagDivWmf, CombinationId::MagDivWmf2,
        CombinationId::PcmraDivWmf, CombinationId::PcmraDivWmf2,
        CombinationId::PcmraT, CombinationId::PcmraSys}) {
    if (s == to_string(id)) return id;
  }
  throw ValidationError("unknown combination: " + s);
}

/// Divisor floor for the x / WMF formulas: normalized WMF attains exactly 0
/// at its minimum voxel.
inline constexpr double kDivisionEpsilon = 1e-6;

/// Min-max standardization to [0, 1]. A constant volume maps to all zeros.
/// Idempotent, and a monotone transform: it preserves voxel ranking, so any
/// threshold sweep downstream sees the same ordering.
template <typename Scalar>
FeatureVolume<Scalar> normalizeMinmax(const FeatureVolume<Scalar>& f) {
  if (f.values.size() != f.meta.numVoxels())
    throw ValidationError("normalizeMinmax: value size does not match meta");
  if (!f.values.allFinite())
    throw ValidationError("normalizeMinmax: input contains non-finite values");
  FeatureVolume<Scalar> out;
  out.meta = f.meta;
  out.kind = f.kind;
  out.normalized = true;
  const Scalar lo = f.values.minCoeff();
  const Scalar hi = f.values.maxCoeff();
  if (lo == hi) {
    out.values = ArrayX<Scalar>::Zero(f.values.size());
  } else {
    out.values = (f.values - lo) / (hi - lo);
  }
  return out;
}

/// Voxel-wise 1 - x of a normalized volume. Fluid carries low WMF, so the
/// inversion is what a threshold consumes.
template <typename Scalar>
FeatureVolume<Scalar> invertWmf(const FeatureVolume<Scalar>& wmf) {
  if (!wmf.normalized)
    throw ValidationError("invertWmf: input must be normalized");
  FeatureVolume<Scalar> out;
  out.meta = wmf.meta;
  out.kind = FeatureKind::InvWmf;
  out.normalized = true;
  out.values = Scalar(1) - wmf.values;
  return out;
}

/// Magnitude frame t as an (unnormalized) feature volume.
template <typename Scalar>
FeatureVolume<Scalar> magnitudeFrame(const MagnitudeSeries<Scalar>& mag,
                                     int t) {
  if (t < 0 || t >= mag.meta.n_frames)
    throw ValidationError("frame index " + std::to_string(t) +
                          " out of range [0, " +
                          std::to_string(mag.meta.n_frames) + ")");
  FeatureVolume<Scalar> out;
  out.meta = mag.meta;
  out.kind = FeatureKind::MagFrame;
  out.normalized = false;
  out.values = mag.frame(t);
  return out;
}

namespace detail {

template <typename Scalar>
const FeatureVolume<Scalar>& requireInput(const FeatureVolume<Scalar>* f,
                                          const char* name,
                                          const GridMeta& grid) {
  if (f == nullptr)
    throw ValidationError(std::string("combine: missing required input ") +
                          name);
  if (!f->normalized)
    throw ValidationError(std::string("combine: input ") + name +
                          " must be normalized");
  if (!f->meta.sameShape(grid))
    throw ValidationError(std::string("combine: input ") + name +
                          " does not share the grid");
  if (f->values.size() != f->meta.numVoxels())
    throw ValidationError(std::string("combine: input ") + name +
                          " has inconsistent size");
  return *f;
}

}  // namespace detail

/// Raw (pre-normalization) evaluation of a combination formula. Inputs must
/// already be normalized; unused inputs may be null. Division is guarded by
/// kDivisionEpsilon so outputs stay finite where WMF is exactly 0.
template <typename Scalar>
FeatureVolume<Scalar> combineRaw(CombinationId id,
                                 const FeatureVolume<Scalar>* mag_t,
                                 const FeatureVolume<Scalar>* pcmra_t,
                                 const FeatureVolume<Scalar>* pcmra_sys,
                                 const FeatureVolume<Scalar>* wmf) {
  const GridMeta& grid = wmf       ? wmf->meta
                         : mag_t   ? mag_t->meta
                         : pcmra_t ? pcmra_t->meta
                         : pcmra_sys
                             ? pcmra_sys->meta
                             : throw ValidationError("combine: no inputs");

  const auto guarded = [](const ArrayX<Scalar>& w) {
    return w.max(Scalar(kDivisionEpsilon));
  };

  FeatureVolume<Scalar> out;
  out.meta = grid;
  out.normalized = false;
  switch (id) {
    case CombinationId::InvWmf: {
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = Scalar(1) - w.values;
      out.kind = FeatureKind::InvWmf;
      break;
    }
    case CombinationId::MagXInvWmf8: {
      const auto& m = detail::requireInput(mag_t, "mag_t", grid);
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = m.values * (Scalar(1) - w.values).pow(8);
      out.kind = FeatureKind::MagXInvWmf8;
      break;
    }
    case CombinationId::MagDivWmf: {
      const auto& m = detail::requireInput(mag_t, "mag_t", grid);
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = m.values / guarded(w.values);
      out.kind = FeatureKind::MagDivWmf;
      break;
    }
    case CombinationId::MagDivWmf2: {
      const auto& m = detail::requireInput(mag_t, "mag_t", grid);
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = m.values / guarded(w.values).square();
      out.kind = FeatureKind::MagDivWmf2;
      break;
    }
    case CombinationId::PcmraDivWmf: {
      const auto& p = detail::requireInput(pcmra_t, "pcmra_t", grid);
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = p.values / guarded(w.values);
      out.kind = FeatureKind::PcmraDivWmf;
      break;
    }
    case CombinationId::PcmraDivWmf2: {
      const auto& p = detail::requireInput(pcmra_t, "pcmra_t", grid);
      const auto& w = detail::requireInput(wmf, "wmf", grid);
      out.values = p.values / guarded(w.values).square();
      out.kind = FeatureKind::PcmraDivWmf2;
      break;
    }
    case CombinationId::PcmraT: {
      const auto& p = detail::requireInput(pcmra_t, "pcmra_t", grid);
      out.values = p.values;
      out.kind = FeatureKind::PcmraFrame;
      break;
    }
    case CombinationId::PcmraSys: {
      const auto& p = detail::requireInput(pcmra_sys, "pcmra_sys", grid);
      out.values = p.values;
      out.kind = FeatureKind::PcmraSys;
      break;
    }
  }
  return out;
}

/// Evaluates a combination formula voxel-wise and min-max normalizes the
/// result, ready for the threshold grid. `wmf` is the min-fused, normalized
/// WMF; `mag_t` / `pcmra_t` / `pcmra_sys` are the normalized magnitude frame
/// and PC-MRA volumes the formula needs (null when unused).
template <typename Scalar>
FeatureVolume<Scalar> combine(CombinationId id,
                              const FeatureVolume<Scalar>* mag_t,
                              const FeatureVolume<Scalar>* pcmra_t,
                              const FeatureVolume<Scalar>* pcmra_sys,
                              const FeatureVolume<Scalar>* wmf) {
  return normalizeMinmax(combineRaw(id, mag_t, pcmra_t, pcmra_sys, wmf));
}

}  // namespace flow4d
