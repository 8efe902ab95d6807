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

// Volume container: a JSON header file plus a raw sidecar payload.
//
//   <path>        JSON header (dims, spacing, frames, venc, components, ...)
//   <path'>       raw payload, little-endian float32; <path'> is <path> with
//                 a trailing ".json" replaced by ".raw" (else ".raw" appended)
//
// Payload layout: one block per component, each block frames_in_payload
// full volumes in the pinned t-major z, y, x-fastest order. 4D series store
// all T frames; 3D volumes (features, masks) store frames_in_payload = 1.
// Writes go to a temp file first and are renamed into place.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flow4d/errors.hpp"
#include "flow4d/fileio.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

inline constexpr const char* kContainerFormat = "flow4d-volume";
inline constexpr int kContainerVersion = 1;
inline constexpr const char* kAxisOrder = "t,z,y,x";

inline std::string payloadPathFor(const std::string& header_path) {
  const std::string suffix = ".json";
  if (header_path.size() > suffix.size() &&
      header_path.compare(header_path.size() - suffix.size(), suffix.size(),
                          suffix) == 0)
    return header_path.substr(0, header_path.size() - suffix.size()) + ".raw";
  return header_path + ".raw";
}

namespace detail {

inline nlohmann::json metaToJson(const GridMeta& m) {
  nlohmann::json j;
  j["dims"] = {m.dims[0], m.dims[1], m.dims[2]};
  j["spacing_mm"] = {m.spacing[0], m.spacing[1], m.spacing[2]};
  j["n_frames"] = m.n_frames;
  if (m.frame_duration) j["frame_duration_s"] = *m.frame_duration;
  j["venc"] = m.venc;
  return j;
}

inline GridMeta metaFromJson(const nlohmann::json& j) {
  GridMeta m;
  for (const char* key : {"dims", "spacing_mm", "n_frames", "venc"})
    if (!j.contains(key))
      throw IoError(std::string("missing required header key: ") + key);
  for (int a = 0; a < 3; ++a) {
    m.dims[a] = j["dims"].at(size_t(a)).get<int>();
    m.spacing[a] = j["spacing_mm"].at(size_t(a)).get<double>();
  }
  m.n_frames = j["n_frames"].get<int>();
  if (j.contains("frame_duration_s"))
    m.frame_duration = j["frame_duration_s"].get<double>();
  m.venc = j["venc"].get<double>();
  if (auto v = metaViolations(m); !v.empty())
    throw ValidationError("invalid header: " + v.front());
  return m;
}

inline nlohmann::json headerSkeleton(const GridMeta& meta,
                                     const std::string& kind,
                                     const std::vector<std::string>& components,
                                     int frames_in_payload,
                                     const std::string& payload_name) {
  nlohmann::json j = metaToJson(meta);
  j["format"] = kContainerFormat;
  j["version"] = kContainerVersion;
  j["kind"] = kind;
  j["axis_order"] = kAxisOrder;
  j["components"] = components;
  j["frames_in_payload"] = frames_in_payload;
  j["dtype"] = "float32";
  j["data_file"] = payload_name;
  return j;
}

inline void writeHeaderAndPayload(const std::string& path,
                                  const nlohmann::json& header,
                                  const std::vector<const float*>& blocks,
                                  Index block_len) {
  writeBlocksAtomic(payloadPathFor(path), blocks, block_len);
  const std::string text = header.dump(2) + "\n";
  writeFileAtomic(path, text.data(), text.size());
}

inline nlohmann::json readHeader(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open container header: " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed container header " + path + ": " + e.what());
  }
  for (const char* key :
       {"format", "kind", "axis_order", "components", "frames_in_payload",
        "dtype", "data_file"})
    if (!j.contains(key))
      throw IoError(std::string("missing required header key: ") + key +
                    " in " + path);
  if (j["format"].get<std::string>() != kContainerFormat)
    throw IoError("not a " + std::string(kContainerFormat) + " header: " +
                  path);
  if (j["dtype"].get<std::string>() != "float32")
    throw IoError("unknown dtype '" + j["dtype"].get<std::string>() +
                  "' in " + path);
  if (j["axis_order"].get<std::string>() != kAxisOrder)
    throw IoError("unsupported axis order '" +
                  j["axis_order"].get<std::string>() + "' in " + path);
  return j;
}

inline std::vector<float> readPayload(const std::string& header_path,
                                      const nlohmann::json& header,
                                      Index expected_values) {
  const std::string payload_path =
      (std::filesystem::path(header_path).parent_path() /
       header["data_file"].get<std::string>())
          .string();
  std::ifstream is(payload_path, std::ios::binary | std::ios::ate);
  if (!is) throw IoError("cannot open payload: " + payload_path);
  const std::streamoff actual = is.tellg();
  const std::streamoff expected =
      std::streamoff(expected_values) * std::streamoff(sizeof(float));
  if (actual != expected)
    throw IoError("payload length mismatch in " + payload_path + ": expected " +
                  std::to_string(expected) + " bytes, got " +
                  std::to_string(actual));
  is.seekg(0);
  std::vector<float> values(static_cast<std::size_t>(expected_values));
  is.read(reinterpret_cast<char*>(values.data()), expected);
  if (!is.good()) throw IoError("payload read failed: " + payload_path);
  return values;
}

}  // namespace detail

/// Kind tag of a container on disk, without loading the payload.
inline std::string containerKind(const std::string& path) {
  return detail::readHeader(path)["kind"].get<std::string>();
}

inline void writeContainer(const VelocitySeries<float>& vel,
                           const std::string& path) {
  nlohmann::json j = detail::headerSkeleton(
      vel.meta, "velocity", {"u", "v", "w"}, vel.meta.n_frames,
      std::filesystem::path(payloadPathFor(path)).filename().string());
  detail::writeHeaderAndPayload(path, j,
                                {vel.components[0].data(),
                                 vel.components[1].data(),
                                 vel.components[2].data()},
                                vel.meta.numSamples());
}

inline void writeContainer(const MagnitudeSeries<float>& mag,
                           const std::string& path) {
  nlohmann::json j = detail::headerSkeleton(
      mag.meta, "magnitude", {"values"}, mag.meta.n_frames,
      std::filesystem::path(payloadPathFor(path)).filename().string());
  detail::writeHeaderAndPayload(path, j, {mag.values.data()},
                                mag.meta.numSamples());
}

inline void writeContainer(const FeatureVolume<float>& f,
                           const std::string& path) {
  nlohmann::json j = detail::headerSkeleton(
      f.meta, "feature", {"values"}, 1,
      std::filesystem::path(payloadPathFor(path)).filename().string());
  j["feature_kind"] = to_string(f.kind);
  j["normalized"] = f.normalized;
  detail::writeHeaderAndPayload(path, j, {f.values.data()},
                                f.meta.numVoxels());
}

inline void writeContainer(const Mask& m, const std::string& path) {
  nlohmann::json j = detail::headerSkeleton(
      m.meta, "mask", {"values"}, 1,
      std::filesystem::path(payloadPathFor(path)).filename().string());
  ArrayX<float> as_float(m.values.size());
  for (Index i = 0; i < m.values.size(); ++i)
    as_float[i] = m.values[i] ? 1.0f : 0.0f;
  detail::writeHeaderAndPayload(path, j, {as_float.data()},
                                m.meta.numVoxels());
}

namespace detail {

inline nlohmann::json readHeaderOfKind(const std::string& path,
                                       const std::string& kind) {
  nlohmann::json j = readHeader(path);
  if (j["kind"].get<std::string>() != kind)
    throw ValidationError("container " + path + " holds kind '" +
                          j["kind"].get<std::string>() + "', expected '" +
                          kind + "'");
  return j;
}

}  // namespace detail

inline VelocitySeries<float> readVelocity(const std::string& path) {
  nlohmann::json j = detail::readHeaderOfKind(path, "velocity");
  VelocitySeries<float> vel;
  vel.meta = detail::metaFromJson(j);
  const Index n = vel.meta.numSamples();
  std::vector<float> payload = detail::readPayload(path, j, 3 * n);
  for (int c = 0; c < 3; ++c) {
    vel.components[size_t(c)].resize(n);
    std::memcpy(vel.components[size_t(c)].data(), payload.data() + size_t(c) * n,
                size_t(n) * sizeof(float));
  }
  return vel;
}

inline MagnitudeSeries<float> readMagnitude(const std::string& path) {
  nlohmann::json j = detail::readHeaderOfKind(path, "magnitude");
  MagnitudeSeries<float> mag;
  mag.meta = detail::metaFromJson(j);
  const Index n = mag.meta.numSamples();
  std::vector<float> payload = detail::readPayload(path, j, n);
  mag.values.resize(n);
  std::memcpy(mag.values.data(), payload.data(), size_t(n) * sizeof(float));
  return mag;
}

inline FeatureVolume<float> readFeature(const std::string& path) {
  nlohmann::json j = detail::readHeaderOfKind(path, "feature");
  FeatureVolume<float> f;
  f.meta = detail::metaFromJson(j);
  if (!j.contains("feature_kind") || !j.contains("normalized"))
    throw IoError("missing required header key: feature_kind/normalized in " +
                  path);
  f.kind = featureKindFromString(j["feature_kind"].get<std::string>());
  f.normalized = j["normalized"].get<bool>();
  const Index n = f.meta.numVoxels();
  std::vector<float> payload = detail::readPayload(path, j, n);
  f.values.resize(n);
  std::memcpy(f.values.data(), payload.data(), size_t(n) * sizeof(float));
  return f;
}

inline Mask readMask(const std::string& path) {
  nlohmann::json j = detail::readHeaderOfKind(path, "mask");
  Mask m;
  m.meta = detail::metaFromJson(j);
  const Index n = m.meta.numVoxels();
  std::vector<float> payload = detail::readPayload(path, j, n);
  m.values.resize(n);
  for (Index i = 0; i < n; ++i) m.values[i] = payload[size_t(i)] > 0.5f;
  return m;
}

}  // namespace flow4d
