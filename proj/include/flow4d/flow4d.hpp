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

#include "flow4d/angiography.hpp"
#include "flow4d/channels.hpp"
#include "flow4d/container.hpp"
#include "flow4d/errors.hpp"
#include "flow4d/feature_lab.hpp"
#include "flow4d/fileio.hpp"
#include "flow4d/grid.hpp"
#include "flow4d/nifti.hpp"
#include "flow4d/phantom.hpp"
#include "flow4d/render.hpp"
#include "flow4d/segmentation.hpp"
#include "flow4d/spectral.hpp"
#include "flow4d/volume.hpp"
