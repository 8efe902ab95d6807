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

#include <doctest.h>

#include "flow4d/angiography.hpp"
#include "flow4d/phantom.hpp"

using namespace flow4d;

namespace {

/// Tiny hand-filled series: every voxel the same (u, v, w) per frame.
VelocitySeries<float> uniformVelocity(const GridMeta& meta,
                                      const std::vector<Eigen::Vector3d>& per_frame) {
  VelocitySeries<float> vel;
  vel.meta = meta;
  const Index nvox = meta.numVoxels();
  for (auto& c : vel.components) c.resize(nvox * meta.n_frames);
  for (int t = 0; t < meta.n_frames; ++t)
    for (Index j = 0; j < nvox; ++j)
      for (int c = 0; c < 3; ++c)
        vel.components[size_t(c)][j + nvox * t] =
            float(per_frame[size_t(t)][c]);
  return vel;
}

GridMeta tinyMeta(int t_count) {
  GridMeta m;
  m.dims = {3, 3, 3};
  m.spacing = {2.5, 2.5, 2.5};
  m.n_frames = t_count;
  m.venc = 2.0;
  return m;
}

MagnitudeSeries<float> constantMagnitude(const GridMeta& meta, float value) {
  MagnitudeSeries<float> mag;
  mag.meta = meta;
  mag.values = ArrayX<float>::Constant(meta.numSamples(), value);
  return mag;
}

}  // namespace

TEST_CASE("speedFrame is the voxel-wise Euclidean norm") {
  const GridMeta meta = tinyMeta(2);
  const auto vel = uniformVelocity(meta, {{0.0, 0.0, 0.0}, {0.3, 0.4, 0.0}});
  const auto zero = speedFrame(vel, 0);
  CHECK(zero.values.abs().maxCoeff() == 0.0f);
  const auto pyth = speedFrame(vel, 1);
  CHECK(pyth.values[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(pyth.kind == FeatureKind::SpeedFrame);
  CHECK_THROWS_AS(speedFrame(vel, 2), ValidationError);
  CHECK_THROWS_AS(speedFrame(vel, -1), ValidationError);
}

TEST_CASE("phantom systolic speed peaks at the configured value") {
  PhantomSpec spec;
  spec.dims = {17, 17, 9};  // odd: a voxel row sits exactly on the centerline
  spec.spacing_mm = {2.0, 2.0, 2.0};
  spec.radius_mm = 6.0;
  spec.n_frames = 12;
  spec.systolic_frame = 5;
  spec.peak_velocity = 0.9;
  spec.snr_mag = std::numeric_limits<double>::infinity();
  const auto data = generate<float>(spec);
  const auto speed = speedFrame(data.velocity, spec.systolic_frame);
  double max_speed = 0.0;
  for (Index j = 0; j < speed.values.size(); ++j)
    if (data.mask.values[j])
      max_speed = std::max(max_speed, double(speed.values[j]));
  CHECK(max_speed == doctest::Approx(spec.peak_velocity).epsilon(1e-6));
}

TEST_CASE("pcmraFrame formula cases") {
  const GridMeta meta = tinyMeta(2);

  SUBCASE("zero speed gives zero output") {
    const auto vel = uniformVelocity(meta, {{0, 0, 0}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 5.0f);
    const auto p = pcmraFrame(mag, vel, 0, 0.2);
    CHECK(p.values.abs().maxCoeff() == 0.0f);
  }
  SUBCASE("speed equal to venc gives the magnitude back") {
    const auto vel = uniformVelocity(meta, {{2.0, 0, 0}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 1.0f);
    for (double gamma : {0.1, 0.2, 1.0}) {
      const auto p = pcmraFrame(mag, vel, 0, gamma);
      CHECK(double(p.values[0]) == doctest::Approx(1.0).epsilon(1e-7));
    }
  }
  SUBCASE("exact gamma power: 2 * (1/32)^0.2 = 1") {
    const auto vel = uniformVelocity(meta, {{2.0 / 32.0, 0, 0}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 2.0f);
    const auto p = pcmraFrame(mag, vel, 0, 0.2);
    CHECK(double(p.values[0]) == doctest::Approx(1.0).epsilon(1e-7));
  }
  SUBCASE("invalid gamma and meta mismatch are rejected") {
    const auto vel = uniformVelocity(meta, {{0, 0, 0}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 1.0f);
    CHECK_THROWS_AS(pcmraFrame(mag, vel, 0, 0.0), ValidationError);
    CHECK_THROWS_AS(pcmraFrame(mag, vel, 0, 1.5), ValidationError);
    auto other = tinyMeta(2);
    other.dims[0] = 4;
    CHECK_THROWS_AS(pcmraFrame(constantMagnitude(other, 1.0f), vel, 0, 0.2),
                    ValidationError);
  }
}

TEST_CASE("pcmra is monotone in speed and nonnegative") {
  const GridMeta meta = tinyMeta(2);
  const auto mag = constantMagnitude(meta, 1.5f);
  const auto slow = uniformVelocity(meta, {{0.2, 0.1, 0.0}, {0, 0, 0}});
  const auto fast = uniformVelocity(meta, {{0.4, 0.2, 0.1}, {0, 0, 0}});
  const auto p_slow = pcmraFrame(mag, slow, 0, 0.2);
  const auto p_fast = pcmraFrame(mag, fast, 0, 0.2);
  for (Index j = 0; j < p_slow.values.size(); ++j) {
    CHECK(p_slow.values[j] >= 0.0f);
    CHECK(p_fast.values[j] >= p_slow.values[j]);
  }
}

TEST_CASE("systolic frame detection") {
  SUBCASE("phantom waveform peaking at frame 5") {
    PhantomSpec spec;
    spec.dims = {15, 15, 9};
    spec.n_frames = 14;
    spec.systolic_frame = 5;
    spec.rng_seed = 9;
    const auto data = generate<float>(spec);
    CHECK(detectSystolicFrame(data.velocity) == 5);
  }
  SUBCASE("time-constant field ties to frame 0") {
    const GridMeta meta = tinyMeta(4);
    const auto vel = uniformVelocity(
        meta, {{0.3, 0, 0}, {0.3, 0, 0}, {0.3, 0, 0}, {0.3, 0, 0}});
    CHECK(detectSystolicFrame(vel) == 0);
  }
  SUBCASE("two identical peaks tie to the smaller index") {
    const GridMeta meta = tinyMeta(12);
    std::vector<Eigen::Vector3d> frames(12, Eigen::Vector3d(0.1, 0, 0));
    frames[4] = {0.9, 0, 0};
    frames[9] = {0.9, 0, 0};
    CHECK(detectSystolicFrame(uniformVelocity(meta, frames)) == 4);
  }
  SUBCASE("invariant under positive global scaling") {
    PhantomSpec spec;
    spec.dims = {11, 11, 9};
    spec.n_frames = 10;
    spec.systolic_frame = 7;
    spec.rng_seed = 4;
    auto data = generate<float>(spec);
    const int base = detectSystolicFrame(data.velocity);
    for (auto& comp : data.velocity.components) comp *= 0.125f;
    CHECK(detectSystolicFrame(data.velocity) == base);
  }
}

TEST_CASE("pcmraSystolic composes detection and the frame formula") {
  PhantomSpec spec;
  spec.dims = {13, 13, 9};
  spec.n_frames = 12;
  spec.systolic_frame = 5;
  spec.rng_seed = 13;
  const auto data = generate<float>(spec);
  const auto sys = pcmraSystolic(data.magnitude, data.velocity, 0.2);
  const auto direct = pcmraFrame(data.magnitude, data.velocity, 5, 0.2);
  CHECK(sys.kind == FeatureKind::PcmraSys);
  for (Index j = 0; j < sys.values.size(); ++j)
    CHECK(sys.values[j] == direct.values[j]);

  SUBCASE("gamma 1 with unit magnitude is speed over venc") {
    const GridMeta meta = tinyMeta(2);
    const auto vel = uniformVelocity(meta, {{0.3, 0.0, 0.4}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 1.0f);
    const auto p = pcmraSystolic(mag, vel, 1.0);
    CHECK(double(p.values[0]) == doctest::Approx(0.25).epsilon(1e-6));
  }
  SUBCASE("zero velocity gives an all-zero volume") {
    const GridMeta meta = tinyMeta(2);
    const auto vel = uniformVelocity(meta, {{0, 0, 0}, {0, 0, 0}});
    const auto mag = constantMagnitude(meta, 3.0f);
    const auto p = pcmraSystolic(mag, vel, 0.2);
    CHECK(p.values.abs().maxCoeff() == 0.0f);
  }
}
