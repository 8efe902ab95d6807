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

// Read-only NIfTI-1 ingestion, for clinical interchange: single-file .nii
// (magic "n+1") or header + sibling .img pair (magic "ni1"), little endian,
// int16 or float32, up to 4 dimensions. scl_slope / scl_inter are applied;
// slope 0 means unscaled per the format's convention.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

namespace detail {

// The 348-byte NIfTI-1 header. Field offsets are fixed by the format:
//   sizeof_hdr @0, dim[8] @40, datatype @70, bitpix @72, pixdim[8] @76,
//   vox_offset @108, scl_slope @112, scl_inter @116, magic @344.
#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

inline constexpr std::int16_t kNiftiInt16 = 4;
inline constexpr std::int16_t kNiftiFloat32 = 16;

}  // namespace detail

/// A decoded NIfTI volume: grid info plus float values in the native NIfTI
/// sample order, which matches the pinned t-major x-fastest layout.
struct NiftiVolume {
  Eigen::Vector3i dims{1, 1, 1};
  Eigen::Vector3d spacing{1.0, 1.0, 1.0};  // mm
  int n_frames = 1;
  std::optional<double> frame_duration;  // seconds, when dim[0] == 4
  Eigen::ArrayXf values;
};

inline NiftiVolume readNifti1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open NIfTI file: " + path);
  detail::Nifti1Header hdr{};
  is.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
  if (!is.good()) throw IoError("cannot read NIfTI header: " + path);

  const bool single = std::memcmp(hdr.magic, "n+1", 4) == 0;
  const bool pair = std::memcmp(hdr.magic, "ni1", 4) == 0;
  if (!single && !pair)
    throw IoError("bad magic in " + path + ": not a NIfTI-1 file");
  if (hdr.sizeof_hdr != 348)
    throw IoError("unsupported NIfTI header size " +
                  std::to_string(hdr.sizeof_hdr) + " in " + path +
                  " (byte-swapped files are not supported)");
  const int ndim = hdr.dim[0];
  if (ndim < 1 || ndim > 4)
    throw IoError("unsupported NIfTI dimensionality " + std::to_string(ndim) +
                  " in " + path + " (only 1..4 supported)");
  if (hdr.datatype != detail::kNiftiInt16 &&
      hdr.datatype != detail::kNiftiFloat32)
    throw IoError("unsupported NIfTI dtype " + std::to_string(hdr.datatype) +
                  " in " + path + " (only int16 and float32 supported)");

  NiftiVolume vol;
  for (int a = 0; a < 3; ++a) {
    vol.dims[a] = a < ndim ? std::max<std::int16_t>(1, hdr.dim[a + 1]) : 1;
    vol.spacing[a] = a < ndim && hdr.pixdim[a + 1] > 0.0f
                         ? double(hdr.pixdim[a + 1])
                         : 1.0;
  }
  vol.n_frames = ndim == 4 ? std::max<std::int16_t>(1, hdr.dim[4]) : 1;
  if (ndim == 4 && hdr.pixdim[4] > 0.0f)
    vol.frame_duration = double(hdr.pixdim[4]);

  const Index count =
      Index(vol.dims[0]) * vol.dims[1] * vol.dims[2] * vol.n_frames;
  const double slope = hdr.scl_slope == 0.0f ? 1.0 : double(hdr.scl_slope);
  const double inter = hdr.scl_slope == 0.0f ? 0.0 : double(hdr.scl_inter);

  std::ifstream data_stream;
  std::ifstream* data = &is;
  std::streamoff offset = std::streamoff(hdr.vox_offset);
  if (pair) {
    const auto img_path =
        std::filesystem::path(path).replace_extension(".img").string();
    data_stream.open(img_path, std::ios::binary);
    if (!data_stream)
      throw IoError("cannot open NIfTI image file: " + img_path);
    data = &data_stream;
  } else if (offset < std::streamoff(sizeof(detail::Nifti1Header))) {
    offset = 352;  // canonical single-file offset
  }
  data->seekg(offset);

  vol.values.resize(count);
  if (hdr.datatype == detail::kNiftiFloat32) {
    data->read(reinterpret_cast<char*>(vol.values.data()),
               std::streamsize(count) * 4);
    if (!data->good()) throw IoError("truncated NIfTI data in " + path);
    if (hdr.scl_slope != 0.0f && (slope != 1.0 || inter != 0.0))
      for (Index i = 0; i < count; ++i)
        vol.values[i] = float(slope * double(vol.values[i]) + inter);
  } else {
    std::vector<std::int16_t> raw(static_cast<std::size_t>(count));
    data->read(reinterpret_cast<char*>(raw.data()),
               std::streamsize(count) * 2);
    if (!data->good()) throw IoError("truncated NIfTI data in " + path);
    for (Index i = 0; i < count; ++i)
      vol.values[i] = float(slope * double(raw[size_t(i)]) + inter);
  }
  return vol;
}

namespace detail {

inline GridMeta niftiMeta(const NiftiVolume& vol, double venc) {
  GridMeta meta;
  meta.dims = vol.dims;
  meta.spacing = vol.spacing;
  meta.n_frames = std::max(2, vol.n_frames);  // meta requires >= 2 frames
  meta.frame_duration = vol.frame_duration;
  meta.venc = venc;
  return meta;
}

}  // namespace detail

/// 4D NIfTI as an anatomical series; venc is not stored in NIfTI and must be
/// supplied by the caller.
inline MagnitudeSeries<float> magnitudeFromNifti(const NiftiVolume& vol,
                                                 double venc) {
  if (vol.n_frames < 2)
    throw ValidationError("magnitude series needs a 4D NIfTI with >= 2 frames");
  MagnitudeSeries<float> mag;
  mag.meta = detail::niftiMeta(vol, venc);
  mag.values = vol.values;
  return mag;
}

/// 3D NIfTI as a feature volume.
inline FeatureVolume<float> featureFromNifti(const NiftiVolume& vol,
                                             double venc, FeatureKind kind) {
  if (vol.n_frames != 1)
    throw ValidationError("feature volume needs a 3D NIfTI");
  FeatureVolume<float> f;
  f.meta = detail::niftiMeta(vol, venc);
  f.kind = kind;
  f.normalized = false;
  f.values = vol.values;
  return f;
}

/// 3D NIfTI label image as a binary mask. With a label, voxels whose rounded
/// value equals it are foreground; otherwise any nonzero voxel is.
inline Mask maskFromNifti(const NiftiVolume& vol,
                          std::optional<long> label = std::nullopt,
                          double venc = 1.0) {
  if (vol.n_frames != 1)
    throw ValidationError("mask needs a 3D NIfTI");
  Mask m;
  m.meta = detail::niftiMeta(vol, venc);
  m.values.resize(vol.values.size());
  for (Index i = 0; i < vol.values.size(); ++i) {
    m.values[i] = label ? std::lround(double(vol.values[i])) == *label
                        : vol.values[i] != 0.0f;
  }
  return m;
}

}  // namespace flow4d
