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

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/fileio.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

/// Threshold grid: 51 points 0, 0.02, ..., 1.0 over the normalized range.
inline constexpr int kSweepPointCount = 51;

inline double sweepThreshold(int k) {
  return double(k) / double(kSweepPointCount - 1);
}

/// Exhaustive sweep output: the IoU-optimal threshold, its metrics, and the
/// full per-threshold curve. Ties on IoU resolve to the smallest threshold.
struct ThresholdSweepResult {
  double best_threshold = 0.0;
  MetricsReport best_metrics;
  std::vector<MetricsReport> curve;  // one entry per grid point, in order
};

/// Binarize a normalized feature: mask(j) = f(j) > tau, strictly greater.
template <typename Scalar>
Mask applyThreshold(const FeatureVolume<Scalar>& f, double tau) {
  if (!f.normalized)
    throw ValidationError("applyThreshold: feature must be normalized");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw ValidationError("applyThreshold: threshold must be in [0, 1], got " +
                          std::to_string(tau));
  if (f.values.size() != f.meta.numVoxels())
    throw ValidationError("applyThreshold: value size does not match meta");
  Mask m;
  m.meta = f.meta;
  m.values.resize(f.values.size());
  for (Index i = 0; i < f.values.size(); ++i)
    m.values[i] = double(f.values[i]) > tau;
  return m;
}

namespace detail {

/// Ratios from exact voxel counts, with the empty-denominator rule
/// 0/0 -> 1 (perfect agreement on emptiness).
inline MetricsReport metricsFromCounts(Index tp, Index fp, Index fn) {
  const auto ratio = [](Index num, Index den) {
    return den == 0 ? 1.0 : double(num) / double(den);
  };
  MetricsReport r;
  r.iou = ratio(tp, tp + fp + fn);
  r.dice = ratio(2 * tp, 2 * tp + fp + fn);
  r.recall = ratio(tp, tp + fn);
  r.precision = ratio(tp, tp + fp);
  return r;
}

}  // namespace detail

/// Overlap metrics between prediction and ground truth.
inline MetricsReport evaluate(const Mask& pred, const Mask& gt) {
  if (!pred.meta.sameShape(gt.meta))
    throw ValidationError("evaluate: mask shapes differ");
  if (pred.values.size() != gt.values.size())
    throw ValidationError("evaluate: mask sizes differ");
  Index tp = 0, fp = 0, fn = 0;
  for (Index i = 0; i < pred.values.size(); ++i) {
    const bool p = pred.values[i];
    const bool g = gt.values[i];
    tp += Index(p && g);
    fp += Index(p && !g);
    fn += Index(!p && g);
  }
  return detail::metricsFromCounts(tp, fp, fn);
}

/// Evaluates applyThreshold + evaluate at every grid threshold and returns
/// the best-by-IoU point plus the full curve. Deterministic; grid points are
/// independent, so callers could evaluate them in any order with identical
/// results.
template <typename Scalar>
ThresholdSweepResult sweepOptimalThreshold(const FeatureVolume<Scalar>& f,
                                           const Mask& gt) {
  if (!f.meta.sameShape(gt.meta))
    throw ValidationError("sweepOptimalThreshold: feature and mask shapes differ");
  ThresholdSweepResult result;
  result.curve.reserve(kSweepPointCount);
  int best_k = -1;
  for (int k = 0; k < kSweepPointCount; ++k) {
    const double tau = sweepThreshold(k);
    MetricsReport m = evaluate(applyThreshold(f, tau), gt);
    m.threshold = tau;
    result.curve.push_back(m);
    if (best_k < 0 || m.iou > result.best_metrics.iou) {
      best_k = k;
      result.best_metrics = m;
    }
  }
  result.best_threshold = sweepThreshold(best_k);
  return result;
}

/// Sweep curve as CSV: tau, iou, dice, recall, precision per row. Doubles
/// are printed with 17 significant digits so they round-trip exactly.
inline void writeSweepCsv(const ThresholdSweepResult& result,
                          std::ostream& os) {
  os << "tau,iou,dice,recall,precision\n";
  char line[256];
  for (const auto& m : result.curve) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  m.threshold.value_or(0.0), m.iou, m.dice, m.recall,
                  m.precision);
    os << line;
  }
}

inline void writeSweepCsv(const ThresholdSweepResult& result,
                          const std::string& path) {
  std::ostringstream os;
  writeSweepCsv(result, os);
  const std::string text = os.str();
  detail::writeFileAtomic(path, text.data(), text.size());
}

}  // namespace flow4d
