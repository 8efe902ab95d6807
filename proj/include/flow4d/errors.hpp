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

#include <stdexcept>
#include <string>

namespace flow4d {

/// Base class for all flow4d errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid data, a broken invariant or a violated precondition.
/// The CLI maps this to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File-level failure: missing file, malformed header, truncated payload.
/// The CLI maps this to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flow4d
