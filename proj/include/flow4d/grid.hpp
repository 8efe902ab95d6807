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
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace flow4d {

using Index = std::int64_t;

/// Grid metadata shared by every volumetric type.
///
/// The pinned sample order, in memory and on disk, is t-major with z, y, x
/// fastest:
///
///   flat(x, y, z, t) = x + nx * (y + ny * (z + nz * t))
///
/// so the time series of one voxel is a strided gather with stride
/// numVoxels().
struct GridMeta {
  Eigen::Vector3i dims{0, 0, 0};         // nx, ny, nz voxel counts
  Eigen::Vector3d spacing{0.0, 0.0, 0.0};  // sx, sy, sz in mm
  int n_frames = 0;                      // cardiac time frames T
  std::optional<double> frame_duration;  // seconds per frame, may be absent
  double venc = 0.0;                     // velocity encoding limit, m/s

  Index numVoxels() const {
    return Index(dims[0]) * Index(dims[1]) * Index(dims[2]);
  }
  Index numSamples() const { return numVoxels() * Index(n_frames); }

  Index spatialIndex(int x, int y, int z) const {
    return Index(x) + Index(dims[0]) * (Index(y) + Index(dims[1]) * Index(z));
  }
  Index flatIndex(int x, int y, int z, int t) const {
    return spatialIndex(x, y, z) + numVoxels() * Index(t);
  }

  /// Inverse of flatIndex; returns (x, y, z, t).
  std::array<int, 4> coords(Index flat) const {
    const Index nvox = numVoxels();
    const int t = int(flat / nvox);
    Index s = flat % nvox;
    const int x = int(s % dims[0]);
    s /= dims[0];
    const int y = int(s % dims[1]);
    const int z = int(s / dims[1]);
    return {x, y, z, t};
  }

  bool inRange(int x, int y, int z) const {
    return x >= 0 && x < dims[0] && y >= 0 && y < dims[1] && z >= 0 &&
           z < dims[2];
  }
  bool inRange(int x, int y, int z, int t) const {
    return inRange(x, y, z) && t >= 0 && t < n_frames;
  }

  /// Spatial shape equality; the only compatibility a voxel-wise binary
  /// operation needs.
  bool sameShape(const GridMeta& o) const { return dims == o.dims; }

  /// Full grid equality (shape, spacing, frame count, VENC).
  bool sameGrid(const GridMeta& o) const {
    return dims == o.dims && spacing == o.spacing && n_frames == o.n_frames &&
           venc == o.venc;
  }
};

/// Invariant check; one message per violation, empty means valid.
inline std::vector<std::string> metaViolations(const GridMeta& m) {
  std::vector<std::string> out;
  for (int a = 0; a < 3; ++a) {
    if (m.dims[a] < 1) {
      std::ostringstream os;
      os << "dims[" << a << "] = " << m.dims[a] << " (must be >= 1)";
      out.push_back(os.str());
    }
    if (!(m.spacing[a] > 0.0)) {
      std::ostringstream os;
      os << "spacing[" << a << "] = " << m.spacing[a] << " (must be > 0)";
      out.push_back(os.str());
    }
  }
  if (m.n_frames < 2) {
    out.push_back("n_frames = " + std::to_string(m.n_frames) +
                  " (must be >= 2)");
  }
  if (!(m.venc > 0.0)) {
    std::ostringstream os;
    os << "venc = " << m.venc << " (must be > 0)";
    out.push_back(os.str());
  }
  if (m.frame_duration && !(*m.frame_duration > 0.0)) {
    std::ostringstream os;
    os << "frame_duration = " << *m.frame_duration << " (must be > 0 if set)";
    out.push_back(os.str());
  }
  return out;
}

}  // namespace flow4d
