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

// Slice rendering to 8-bit binary PGM (P5), min-max windowed. Slice
// orientation: axis 'z' -> rows y / cols x, axis 'y' -> rows z / cols x,
// axis 'x' -> rows z / cols y.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/fileio.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

namespace detail {

struct SlicePlan {
  int rows = 0;
  int cols = 0;
  // voxel coordinate for image pixel (row, col)
  int axis = 2;  // 0 = x, 1 = y, 2 = z
};

inline SlicePlan slicePlan(const GridMeta& meta, char axis, int index) {
  SlicePlan p;
  switch (axis) {
    case 'x': p.axis = 0; p.rows = meta.dims[2]; p.cols = meta.dims[1]; break;
    case 'y': p.axis = 1; p.rows = meta.dims[2]; p.cols = meta.dims[0]; break;
    case 'z': p.axis = 2; p.rows = meta.dims[1]; p.cols = meta.dims[0]; break;
    default:
      throw ValidationError(std::string("unknown slice axis '") + axis +
                            "' (use x, y or z)");
  }
  if (index < 0 || index >= meta.dims[p.axis])
    throw ValidationError("slice index " + std::to_string(index) +
                          " out of range [0, " +
                          std::to_string(meta.dims[p.axis]) + ")");
  return p;
}

inline Index sliceVoxel(const GridMeta& meta, const SlicePlan& p, int index,
                        int row, int col) {
  switch (p.axis) {
    case 0: return meta.spatialIndex(index, col, row);
    case 1: return meta.spatialIndex(col, index, row);
    default: return meta.spatialIndex(col, row, index);
  }
}

inline void writePgm(const std::string& path, int rows, int cols,
                     const std::vector<unsigned char>& pixels) {
  std::ostringstream os;
  os << "P5\n" << cols << " " << rows << "\n255\n";
  std::string head = os.str();
  std::string bytes;
  bytes.reserve(head.size() + pixels.size());
  bytes.append(head);
  bytes.append(reinterpret_cast<const char*>(pixels.data()), pixels.size());
  writeFileAtomic(path, bytes.data(), bytes.size());
}

}  // namespace detail

/// Renders one slice of a feature volume, windowed to its own min-max range.
/// A constant volume renders uniform mid-gray.
template <typename Scalar>
void renderSlice(const FeatureVolume<Scalar>& f, char axis, int index,
                 const std::string& path) {
  const auto plan = detail::slicePlan(f.meta, axis, index);
  if (f.values.size() != f.meta.numVoxels())
    throw ValidationError("renderSlice: value size does not match meta");
  if (!f.values.allFinite())
    throw ValidationError("renderSlice: input contains non-finite values");
  const double lo = double(f.values.minCoeff());
  const double hi = double(f.values.maxCoeff());
  std::vector<unsigned char> pixels(size_t(plan.rows) * size_t(plan.cols));
  for (int r = 0; r < plan.rows; ++r) {
    for (int c = 0; c < plan.cols; ++c) {
      const double v = double(f.values[detail::sliceVoxel(f.meta, plan, index,
                                                          r, c)]);
      double g = hi == lo ? 128.0 : std::round(255.0 * (v - lo) / (hi - lo));
      g = std::clamp(g, 0.0, 255.0);
      pixels[size_t(r) * size_t(plan.cols) + size_t(c)] =
          static_cast<unsigned char>(g);
    }
  }
  detail::writePgm(path, plan.rows, plan.cols, pixels);
}

/// Renders one slice of a mask: foreground white, background black.
inline void renderSlice(const Mask& m, char axis, int index,
                        const std::string& path) {
  const auto plan = detail::slicePlan(m.meta, axis, index);
  std::vector<unsigned char> pixels(size_t(plan.rows) * size_t(plan.cols));
  for (int r = 0; r < plan.rows; ++r)
    for (int c = 0; c < plan.cols; ++c)
      pixels[size_t(r) * size_t(plan.cols) + size_t(c)] =
          m.values[detail::sliceVoxel(m.meta, plan, index, r, c)] ? 255 : 0;
  detail::writePgm(path, plan.rows, plan.cols, pixels);
}

}  // namespace flow4d
