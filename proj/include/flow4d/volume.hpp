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

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/grid.hpp"

namespace flow4d {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Identifies the formula that produced a FeatureVolume.
enum class FeatureKind {
  WmfU,
  WmfV,
  WmfW,
  WmfMin,
  MagFrame,
  SpeedFrame,
  PcmraFrame,
  PcmraSys,
  InvWmf,
  MagXInvWmf8,
  MagDivWmf,
  MagDivWmf2,
  PcmraDivWmf,
  PcmraDivWmf2,
};

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::WmfU: return "wmf_u";
    case FeatureKind::WmfV: return "wmf_v";
    case FeatureKind::WmfW: return "wmf_w";
    case FeatureKind::WmfMin: return "wmf_min";
    case FeatureKind::MagFrame: return "mag_frame";
    case FeatureKind::SpeedFrame: return "speed_frame";
    case FeatureKind::PcmraFrame: return "pcmra_frame";
    case FeatureKind::PcmraSys: return "pcmra_sys";
    case FeatureKind::InvWmf: return "inv_wmf";
    case FeatureKind::MagXInvWmf8: return "mag_x_invwmf8";
    case FeatureKind::MagDivWmf: return "mag_div_wmf";
    case FeatureKind::MagDivWmf2: return "mag_div_wmf2";
    case FeatureKind::PcmraDivWmf: return "pcmra_div_wmf";
    case FeatureKind::PcmraDivWmf2: return "pcmra_div_wmf2";
  }
  return "unknown";
}

inline std::ostream& operator<<(std::ostream& os, FeatureKind k) {
  return os << to_string(k);
}

inline FeatureKind featureKindFromString(const std::string& s) {
  for (FeatureKind k :
       {FeatureKind::WmfU, FeatureKind::WmfV, FeatureKind::WmfW,
        FeatureKind::WmfMin, FeatureKind::MagFrame, FeatureKind::SpeedFrame,
        FeatureKind::PcmraFrame, FeatureKind::PcmraSys, FeatureKind::InvWmf,
        FeatureKind::MagXInvWmf8, FeatureKind::MagDivWmf,
        FeatureKind::MagDivWmf2, FeatureKind::PcmraDivWmf,
        FeatureKind::PcmraDivWmf2}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("unknown feature kind: " + s);
}

/// Three-component velocity field over (t, x, y, z) in m/s.
/// components[0..2] = u, v, w (left-right, anterior-posterior, foot-head),
/// each of length numSamples() in the pinned t-major order.
template <typename Scalar>
struct VelocitySeries {
  GridMeta meta;
  std::array<ArrayX<Scalar>, 3> components;

  /// View of one component at one time frame (numVoxels() values).
  auto frame(int component, int t) const {
    return components[size_t(component)].segment(Index(t) * meta.numVoxels(),
                                                 meta.numVoxels());
  }
};

/// Anatomical signal over (t, x, y, z), non-negative scanner units.
template <typename Scalar>
struct MagnitudeSeries {
  GridMeta meta;
  ArrayX<Scalar> values;  // length numSamples()

  auto frame(int t) const {
    return values.segment(Index(t) * meta.numVoxels(), meta.numVoxels());
  }
};

/// One scalar per voxel, produced by a tagged formula.
/// Once normalized, values live in [0, 1] with min 0 and max 1 unless the
/// field is constant.
template <typename Scalar>
struct FeatureVolume {
  GridMeta meta;
  ArrayX<Scalar> values;  // length numVoxels()
  FeatureKind kind = FeatureKind::WmfMin;
  bool normalized = false;
};

/// Binary 3D segmentation volume.
struct Mask {
  GridMeta meta;
  BoolArray values;  // length numVoxels()

  Index count() const { return values.count(); }
};

/// Overlap metrics between a predicted and a ground-truth mask, plus the
/// threshold that produced the prediction when one was applied.
struct MetricsReport {
  double iou = 0.0;
  double dice = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  std::optional<double> threshold;
};

using VelocitySeriesF = VelocitySeries<float>;
using MagnitudeSeriesF = MagnitudeSeries<float>;
using FeatureVolumeF = FeatureVolume<float>;

namespace detail {

inline void appendMeta(const GridMeta& m, std::vector<std::string>& out) {
  for (auto& v : metaViolations(m)) out.push_back("meta: " + v);
}

}  // namespace detail

/// Invariant checks. Each returns the list of violations (empty = valid)
/// and never mutates its input.
template <typename Scalar>
std::vector<std::string> validate(const VelocitySeries<Scalar>& series) {
  std::vector<std::string> out;
  detail::appendMeta(series.meta, out);
  const char* names[3] = {"u", "v", "w"};
  for (int c = 0; c < 3; ++c) {
    const auto& comp = series.components[size_t(c)];
    if (comp.size() != series.meta.numSamples()) {
      std::ostringstream os;
      os << names[c] << ": size " << comp.size() << " != expected "
         << series.meta.numSamples();
      out.push_back(os.str());
      continue;
    }
    for (Index i = 0; i < comp.size(); ++i) {
      const Scalar v = comp[i];
      if (!std::isfinite(double(v)) || std::abs(double(v)) > series.meta.venc) {
        const auto c4 = series.meta.coords(i);
        std::ostringstream os;
        os << names[c] << " at voxel (" << c4[0] << ", " << c4[1] << ", "
           << c4[2] << "), frame " << c4[3] << ": value " << double(v)
           << " outside [-venc, venc] = [" << -series.meta.venc << ", "
           << series.meta.venc << "]";
        out.push_back(os.str());
        break;  // one message per component is enough
      }
    }
  }
  return out;
}

template <typename Scalar>
std::vector<std::string> validate(const MagnitudeSeries<Scalar>& series) {
  std::vector<std::string> out;
  detail::appendMeta(series.meta, out);
  if (series.values.size() != series.meta.numSamples()) {
    out.push_back("values: size " + std::to_string(series.values.size()) +
                  " != expected " + std::to_string(series.meta.numSamples()));
    return out;
  }
  for (Index i = 0; i < series.values.size(); ++i) {
    const double v = double(series.values[i]);
    if (!std::isfinite(v) || v < 0.0) {
      const auto c4 = series.meta.coords(i);
      std::ostringstream os;
      os << "magnitude at voxel (" << c4[0] << ", " << c4[1] << ", " << c4[2]
         << "), frame " << c4[3] << ": value " << v
         << " (must be finite and >= 0)";
      out.push_back(os.str());
      break;
    }
  }
  return out;
}

template <typename Scalar>
std::vector<std::string> validate(const FeatureVolume<Scalar>& f) {
  std::vector<std::string> out;
  detail::appendMeta(f.meta, out);
  if (f.values.size() != f.meta.numVoxels()) {
    out.push_back("values: size " + std::to_string(f.values.size()) +
                  " != expected " + std::to_string(f.meta.numVoxels()));
    return out;
  }
  if (!f.values.allFinite()) {
    for (Index i = 0; i < f.values.size(); ++i) {
      if (!std::isfinite(double(f.values[i]))) {
        const auto c4 = f.meta.coords(i);
        std::ostringstream os;
        os << "non-finite value at voxel (" << c4[0] << ", " << c4[1] << ", "
           << c4[2] << ")";
        out.push_back(os.str());
        break;
      }
    }
  } else if (f.normalized && f.values.size() > 0) {
    const double lo = double(f.values.minCoeff());
    const double hi = double(f.values.maxCoeff());
    if (lo < 0.0 || hi > 1.0) {
      std::ostringstream os;
      os << "normalized volume has range [" << lo << ", " << hi
         << "] outside [0, 1]";
      out.push_back(os.str());
    } else if (lo != hi && (lo != 0.0 || hi != 1.0)) {
      std::ostringstream os;
      os << "normalized non-constant volume must attain 0 and 1, got [" << lo
         << ", " << hi << "]";
      out.push_back(os.str());
    }
  }
  return out;
}

inline std::vector<std::string> validate(const Mask& m) {
  std::vector<std::string> out;
  detail::appendMeta(m.meta, out);
  if (m.values.size() != m.meta.numVoxels()) {
    out.push_back("values: size " + std::to_string(m.values.size()) +
                  " != expected " + std::to_string(m.meta.numVoxels()));
  }
  return out;
}

}  // namespace flow4d
