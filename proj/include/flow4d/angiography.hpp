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

#include <algorithm>
#include <cmath>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

/// Default gamma compression exponent for PC-MRA; small values lift the
/// visibility of slow flow.
inline constexpr double kDefaultPcmraGamma = 0.2;

/// Quantile above which voxel speeds count towards systole detection.
/// The vessel occupies a small volume fraction, so a whole-volume mean
/// would be dominated by background noise.
inline constexpr double kSystoleSpeedQuantile = 0.9;

/// Voxel-wise speed sqrt(u^2 + v^2 + w^2) at one time frame, m/s.
template <typename Scalar>
FeatureVolume<Scalar> speedFrame(const VelocitySeries<Scalar>& vel, int t) {
  if (t < 0 || t >= vel.meta.n_frames)
    throw ValidationError("frame index " + std::to_string(t) +
                          " out of range [0, " +
                          std::to_string(vel.meta.n_frames) + ")");
  FeatureVolume<Scalar> out;
  out.meta = vel.meta;
  out.kind = FeatureKind::SpeedFrame;
  out.normalized = false;
  out.values = (vel.frame(0, t).square() + vel.frame(1, t).square() +
                vel.frame(2, t).square())
                   .sqrt();
  return out;
}

/// PC-MRA at one time frame: mag(t) * (speed(t) / venc)^gamma.
/// Speed is normalized by VENC before exponentiation so the gamma term is
/// dimensionless and at most 1 for physical data.
template <typename Scalar>
FeatureVolume<Scalar> pcmraFrame(const MagnitudeSeries<Scalar>& mag,
                                 const VelocitySeries<Scalar>& vel, int t,
                                 double gamma = kDefaultPcmraGamma) {
  if (!mag.meta.sameShape(vel.meta) || mag.meta.n_frames != vel.meta.n_frames)
    throw ValidationError("pcmraFrame: magnitude and velocity grids differ");
  if (!(gamma > 0.0) || gamma > 1.0)
    throw ValidationError("pcmraFrame: gamma must be in (0, 1], got " +
                          std::to_string(gamma));
  if (!(vel.meta.venc > 0.0))
    throw ValidationError("pcmraFrame: venc must be > 0");

  FeatureVolume<Scalar> speed = speedFrame(vel, t);
  Eigen::ArrayXd sp = speed.values.template cast<double>() / vel.meta.venc;
  Eigen::ArrayXd m = mag.frame(t).template cast<double>();

  FeatureVolume<Scalar> out;
  out.meta = vel.meta;
  out.kind = FeatureKind::PcmraFrame;
  out.normalized = false;
  out.values = (m * sp.pow(gamma)).cast<Scalar>();
  return out;
}

/// Frame of peak flow: argmax over t of the mean of the top-decile voxel
/// speeds. Ties break to the smaller index. Invariant under global velocity
/// scaling by any positive factor.
template <typename Scalar>
int detectSystolicFrame(const VelocitySeries<Scalar>& vel) {
  if (auto v = metaViolations(vel.meta); !v.empty())
    throw ValidationError("invalid series meta: " + v.front());
  const Index nvox = vel.meta.numVoxels();
  const Index top = std::max<Index>(
      1, nvox - Index(std::floor(double(nvox) * kSystoleSpeedQuantile)));

  int best_frame = 0;
  double best_score = -1.0;
  std::vector<double> speeds(static_cast<std::size_t>(nvox));
  for (int t = 0; t < vel.meta.n_frames; ++t) {
    const auto u = vel.frame(0, t);
    const auto v = vel.frame(1, t);
    const auto w = vel.frame(2, t);
    for (Index j = 0; j < nvox; ++j) {
      const double uu = double(u[j]), vv = double(v[j]), ww = double(w[j]);
      speeds[size_t(j)] = std::sqrt(uu * uu + vv * vv + ww * ww);
    }
    auto cut = speeds.begin() + (nvox - top);
    std::nth_element(speeds.begin(), cut, speeds.end());
    std::sort(cut, speeds.end());  // fixed summation order
    double sum = 0.0;
    for (auto it = cut; it != speeds.end(); ++it) sum += *it;
    const double score = sum / double(top);
    if (score > best_score) {
      best_score = score;
      best_frame = t;
    }
  }
  return best_frame;
}

/// PC-MRA at the detected systolic frame, the frame where the fluid domain
/// is most visible.
template <typename Scalar>
FeatureVolume<Scalar> pcmraSystolic(const MagnitudeSeries<Scalar>& mag,
                                    const VelocitySeries<Scalar>& vel,
                                    double gamma = kDefaultPcmraGamma) {
  FeatureVolume<Scalar> out =
      pcmraFrame(mag, vel, detectSystolicFrame(vel), gamma);
  out.kind = FeatureKind::PcmraSys;
  return out;
}

}  // namespace flow4d
