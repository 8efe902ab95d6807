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

#include <random>
#include <sstream>

#include "flow4d/feature_lab.hpp"
#include "flow4d/phantom.hpp"
#include "flow4d/segmentation.hpp"
#include "flow4d/spectral.hpp"
#include "oracles.hpp"

using namespace flow4d;

namespace {

GridMeta cubeMeta(int n) {
  GridMeta m;
  m.dims = {n, n, n};
  m.spacing = {1, 1, 1};
  m.n_frames = 4;
  m.venc = 1.0;
  return m;
}

FeatureVolume<float> normalizedVolume(const GridMeta& meta,
                                      const ArrayX<float>& values) {
  FeatureVolume<float> f;
  f.meta = meta;
  f.values = values;
  f.normalized = true;
  return f;
}

Mask maskOf(const GridMeta& meta, const BoolArray& values) {
  Mask m;
  m.meta = meta;
  m.values = values;
  return m;
}

}  // namespace

TEST_CASE("applyThreshold uses strict inequality") {
  const GridMeta meta = cubeMeta(1);
  GridMeta three = meta;
  three.dims = {3, 1, 1};
  ArrayX<float> vals(3);
  vals << 0.0f, 0.5f, 1.0f;
  const auto f = normalizedVolume(three, vals);

  const Mask at_half = applyThreshold(f, 0.5);
  CHECK_FALSE(at_half.values[0]);
  CHECK_FALSE(at_half.values[1]);  // 0.5 > 0.5 is false
  CHECK(at_half.values[2]);

  const Mask at_one = applyThreshold(f, 1.0);
  CHECK(at_one.count() == 0);

  const Mask at_zero = applyThreshold(f, 0.0);
  CHECK(at_zero.count() == 2);  // exactly the non-minimum voxels

  SUBCASE("unnormalized and out-of-range inputs are rejected") {
    auto raw = f;
    raw.normalized = false;
    CHECK_THROWS_AS(applyThreshold(raw, 0.5), ValidationError);
    CHECK_THROWS_AS(applyThreshold(f, 1.5), ValidationError);
    CHECK_THROWS_AS(applyThreshold(f, -0.1), ValidationError);
  }
}

TEST_CASE("evaluate on constructed masks") {
  GridMeta meta = cubeMeta(10);
  BoolArray gt = BoolArray::Constant(meta.numVoxels(), false);
  BoolArray pred = gt;

  SUBCASE("identical nonempty masks score 1 everywhere") {
    for (Index i = 0; i < 120; ++i) gt[i] = pred[i] = true;
    const auto r = evaluate(maskOf(meta, pred), maskOf(meta, gt));
    CHECK(r.iou == 1.0);
    CHECK(r.dice == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.precision == 1.0);
  }
  SUBCASE("disjoint nonempty masks score 0 everywhere") {
    for (Index i = 0; i < 50; ++i) gt[i] = true;
    for (Index i = 50; i < 100; ++i) pred[i] = true;
    const auto r = evaluate(maskOf(meta, pred), maskOf(meta, gt));
    CHECK(r.iou == 0.0);
    CHECK(r.dice == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.precision == 0.0);
  }
  SUBCASE("half overlap: |P| = |G| = 100, |P and G| = 50") {
    for (Index i = 0; i < 100; ++i) gt[i] = true;
    for (Index i = 50; i < 150; ++i) pred[i] = true;
    const auto r = evaluate(maskOf(meta, pred), maskOf(meta, gt));
    CHECK(r.iou == 1.0 / 3.0);
    CHECK(r.dice == 0.5);
    CHECK(r.recall == 0.5);
    CHECK(r.precision == 0.5);
  }
  SUBCASE("both empty: perfect agreement on emptiness") {
    const auto r = evaluate(maskOf(meta, pred), maskOf(meta, gt));
    CHECK(r.iou == 1.0);
    CHECK(r.dice == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.precision == 1.0);
  }
  SUBCASE("shape mismatch is rejected") {
    GridMeta other = cubeMeta(9);
    Mask small = maskOf(other, BoolArray::Constant(other.numVoxels(), false));
    CHECK_THROWS_AS(evaluate(small, maskOf(meta, gt)), ValidationError);
  }
}

TEST_CASE("metric properties on random mask pairs") {
  std::mt19937_64 gen(23);
  const GridMeta meta = cubeMeta(8);
  std::bernoulli_distribution coin(0.3);
  for (int rep = 0; rep < 200; ++rep) {
    BoolArray a(meta.numVoxels()), b(meta.numVoxels());
    for (Index i = 0; i < meta.numVoxels(); ++i) {
      a[i] = coin(gen);
      b[i] = coin(gen);
    }
    const auto r = evaluate(maskOf(meta, a), maskOf(meta, b));
    // dice = 2 iou / (1 + iou)
    CHECK(std::abs(r.dice - 2.0 * r.iou / (1.0 + r.iou)) <= 1e-12);
    // precision * |P| = recall * |G| (both count the intersection)
    const double lhs = r.precision * double(a.count());
    const double rhs = r.recall * double(b.count());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    for (double v : {r.iou, r.dice, r.recall, r.precision}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("mask nesting: higher thresholds predict subsets") {
  std::mt19937_64 gen(29);
  const GridMeta meta = cubeMeta(6);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  for (int rep = 0; rep < 200; ++rep) {
    ArrayX<float> vals(meta.numVoxels());
    for (Index i = 0; i < vals.size(); ++i) vals[i] = dist(gen);
    const auto f = normalizeMinmax(normalizedVolume(meta, vals));
    const double tau_a = dist(gen), tau_b = dist(gen);
    const double lo = std::min(tau_a, tau_b), hi = std::max(tau_a, tau_b);
    const Mask wide = applyThreshold(f, lo);
    const Mask narrow = applyThreshold(f, hi);
    for (Index i = 0; i < meta.numVoxels(); ++i)
      if (narrow.values[i]) CHECK(wide.values[i]);
  }
}

TEST_CASE("sweep equals the exhaustive oracle on a perfect encoding") {
  const GridMeta meta = cubeMeta(10);
  BoolArray gt(meta.numVoxels());
  for (Index i = 0; i < meta.numVoxels(); ++i) gt[i] = (i % 7) == 0;
  ArrayX<float> encoded(meta.numVoxels());
  for (Index i = 0; i < meta.numVoxels(); ++i) encoded[i] = gt[i] ? 1.0f : 0.0f;
  const auto f = normalizedVolume(meta, encoded);
  const auto sweep = sweepOptimalThreshold(f, maskOf(meta, gt));
  CHECK(sweep.best_metrics.iou == 1.0);
  CHECK(sweep.best_threshold == 0.0);  // ties resolve to the smallest tau
  CHECK(sweep.curve.size() == 51);
}

TEST_CASE("sweep matches the exhaustive oracle point by point") {
  std::mt19937_64 gen(31);
  const GridMeta meta = cubeMeta(10);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);

  for (int variant = 0; variant < 3; ++variant) {
    BoolArray gt(meta.numVoxels());
    ArrayX<float> vals(meta.numVoxels());
    for (Index i = 0; i < meta.numVoxels(); ++i) {
      gt[i] = (i % 5) < 2;
      // include the inverted encoding and noisy variants
      const float base = gt[i] ? 1.0f : 0.0f;
      vals[i] = variant == 0 ? 1.0f - base
                             : std::clamp(base + 0.7f * (dist(gen) - 0.5f),
                                          0.0f, 1.0f);
    }
    const auto f = normalizedVolume(meta, vals);
    const auto sweep = sweepOptimalThreshold(f, maskOf(meta, gt));
    const auto expected = oracles::exhaustiveSweep(vals, gt);
    REQUIRE(sweep.curve.size() == expected.size());
    double best_iou = -1.0;
    double best_tau = 0.0;
    for (size_t k = 0; k < expected.size(); ++k) {
      CHECK(*sweep.curve[k].threshold == expected[k].tau);
      CHECK(sweep.curve[k].iou == expected[k].iou);
      CHECK(sweep.curve[k].dice == expected[k].dice);
      CHECK(sweep.curve[k].recall == expected[k].recall);
      CHECK(sweep.curve[k].precision == expected[k].precision);
      if (expected[k].iou > best_iou) {
        best_iou = expected[k].iou;
        best_tau = expected[k].tau;
      }
    }
    CHECK(sweep.best_threshold == best_tau);
    CHECK(sweep.best_metrics.iou == best_iou);
  }
}

TEST_CASE("recall is non-increasing along the threshold grid") {
  std::mt19937_64 gen(37);
  const GridMeta meta = cubeMeta(8);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  ArrayX<float> vals(meta.numVoxels());
  BoolArray gt(meta.numVoxels());
  for (Index i = 0; i < meta.numVoxels(); ++i) {
    vals[i] = dist(gen);
    gt[i] = dist(gen) < 0.2f;
  }
  const auto sweep =
      sweepOptimalThreshold(normalizedVolume(meta, vals), maskOf(meta, gt));
  for (size_t k = 1; k < sweep.curve.size(); ++k)
    CHECK(sweep.curve[k].recall <= sweep.curve[k - 1].recall);
}

TEST_CASE("sweep optimum is stable under monotone feature rescaling") {
  std::mt19937_64 gen(41);
  const GridMeta meta = cubeMeta(8);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  ArrayX<float> vals(meta.numVoxels());
  BoolArray gt(meta.numVoxels());
  for (Index i = 0; i < meta.numVoxels(); ++i) {
    vals[i] = dist(gen);
    gt[i] = vals[i] > 0.6f ? dist(gen) < 0.8f : dist(gen) < 0.1f;
  }
  const auto base =
      sweepOptimalThreshold(normalizedVolume(meta, vals), maskOf(meta, gt));

  // adjacent-point variation of the base curve bounds the allowed change
  double max_step = 0.0;
  for (size_t k = 1; k < base.curve.size(); ++k)
    max_step = std::max(max_step,
                        std::abs(base.curve[k].iou - base.curve[k - 1].iou));

  for (int rep = 0; rep < 5; ++rep) {
    const double p = 0.5 + 2.0 * double(rep) / 4.0;  // strictly increasing x^p
    ArrayX<float> transformed(vals.size());
    for (Index i = 0; i < vals.size(); ++i)
      transformed[i] = float(std::pow(double(vals[i]), p));
    FeatureVolume<float> g;
    g.meta = meta;
    g.values = transformed;
    const auto renorm = normalizeMinmax(g);
    const auto other = sweepOptimalThreshold(renorm, maskOf(meta, gt));
    CHECK(std::abs(other.best_metrics.iou - base.best_metrics.iou) <=
          max_step + 1e-12);
  }
}

TEST_CASE("phantom WMF feature recovers the vessel at SNR 20") {
  PhantomSpec spec;
  spec.dims = {21, 21, 15};
  spec.spacing_mm = {2.5, 2.5, 2.5};
  spec.radius_mm = 9.0;
  spec.n_frames = 20;
  spec.systolic_frame = 5;
  spec.waveform = WaveformKind::PureHarmonic;
  spec.harmonic = 1;
  spec.peak_velocity = 1.45;
  spec.snr_mag = 20.0;
  spec.rng_seed = 77;
  const auto data = generate<float>(spec);
  const auto wmf_n = normalizeMinmax(
      wmfMin(wmfComponent(data.velocity, 0), wmfComponent(data.velocity, 1),
             wmfComponent(data.velocity, 2)));
  const auto inv = invertWmf(wmf_n);
  const auto sweep = sweepOptimalThreshold(inv, data.mask);
  CHECK(sweep.best_metrics.iou >= 0.8);
}

TEST_CASE("sweep CSV lists every grid point with full precision") {
  const GridMeta meta = cubeMeta(4);
  ArrayX<float> vals = ArrayX<float>::Zero(meta.numVoxels());
  vals[0] = 1.0f;
  BoolArray gt = BoolArray::Constant(meta.numVoxels(), false);
  gt[0] = true;
  const auto sweep =
      sweepOptimalThreshold(normalizedVolume(meta, vals), maskOf(meta, gt));
  std::ostringstream os;
  writeSweepCsv(sweep, os);
  const std::string csv = os.str();
  CHECK(csv.rfind("tau,iou,dice,recall,precision\n", 0) == 0);
  size_t rows = 0;
  for (char ch : csv)
    if (ch == '\n') ++rows;
  CHECK(rows == 52);  // header + 51 grid points
}
