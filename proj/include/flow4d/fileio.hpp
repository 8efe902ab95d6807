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

// Atomic file writes: everything goes to <path>.tmp first and is renamed
// into place, so a crash never leaves a half-written output behind.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/grid.hpp"

namespace flow4d::detail {

inline void renameIntoPlace(const std::string& tmp, const std::string& path) {
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename " + tmp + " to " + path + ": " +
                  ec.message());
}

inline void writeFileAtomic(const std::string& path, const void* data,
                            std::size_t size) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os.write(static_cast<const char*>(data), std::streamsize(size));
    if (!os.good()) throw IoError("write failed: " + tmp);
  }
  renameIntoPlace(tmp, path);
}

/// Streams a sequence of equally sized float blocks; no in-memory copy.
inline void writeBlocksAtomic(const std::string& path,
                              const std::vector<const float*>& blocks,
                              Index block_len) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    for (const float* b : blocks)
      os.write(reinterpret_cast<const char*>(b),
               std::streamsize(std::size_t(block_len) * sizeof(float)));
    if (!os.good()) throw IoError("write failed: " + tmp);
  }
  renameIntoPlace(tmp, path);
}

}  // namespace flow4d::detail
