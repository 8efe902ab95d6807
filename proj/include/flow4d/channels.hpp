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

// Multi-channel export: a stack of 3D feature volumes concatenated in
// declared order, with the producing-formula tags recorded in the header so
// an external trainer can rebuild each input combination exactly.

#include <string>
#include <vector>

#include "flow4d/container.hpp"
#include "flow4d/errors.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

struct ChannelStack {
  GridMeta meta;
  std::vector<std::string> kinds;    // per channel, in payload order
  std::vector<bool> normalized;      // per channel
  std::vector<ArrayX<float>> values; // per channel, numVoxels() each
};

inline void exportChannels(const std::vector<const FeatureVolume<float>*>& channels,
                           const std::string& path) {
  if (channels.empty())
    throw ValidationError("exportChannels: empty channel selection");
  const GridMeta& meta = channels.front()->meta;
  std::vector<std::string> kinds;
  std::vector<const float*> blocks;
  nlohmann::json normalized = nlohmann::json::array();
  for (const auto* ch : channels) {
    if (ch == nullptr)
      throw ValidationError("exportChannels: null channel");
    if (!ch->meta.sameShape(meta))
      throw ValidationError("exportChannels: channels do not share a grid");
    if (ch->values.size() != meta.numVoxels())
      throw ValidationError("exportChannels: channel size does not match meta");
    kinds.push_back(to_string(ch->kind));
    normalized.push_back(ch->normalized);
    blocks.push_back(ch->values.data());
  }
  nlohmann::json j = detail::headerSkeleton(
      meta, "channels", kinds, 1,
      std::filesystem::path(payloadPathFor(path)).filename().string());
  j["channel_normalized"] = normalized;
  detail::writeHeaderAndPayload(path, j, blocks, meta.numVoxels());
}

inline ChannelStack readChannels(const std::string& path) {
  nlohmann::json j = detail::readHeaderOfKind(path, "channels");
  ChannelStack stack;
  stack.meta = detail::metaFromJson(j);
  stack.kinds = j["components"].get<std::vector<std::string>>();
  if (j.contains("channel_normalized"))
    stack.normalized = j["channel_normalized"].get<std::vector<bool>>();
  else
    stack.normalized.assign(stack.kinds.size(), false);
  const Index nvox = stack.meta.numVoxels();
  const Index n_chan = Index(stack.kinds.size());
  std::vector<float> payload = detail::readPayload(path, j, n_chan * nvox);
  stack.values.resize(size_t(n_chan));
  for (Index c = 0; c < n_chan; ++c) {
    stack.values[size_t(c)].resize(nvox);
    std::memcpy(stack.values[size_t(c)].data(),
                payload.data() + size_t(c) * size_t(nvox),
                size_t(nvox) * sizeof(float));
  }
  return stack;
}

}  // namespace flow4d
