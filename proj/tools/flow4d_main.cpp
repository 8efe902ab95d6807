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

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flow4d/flow4d.hpp"

namespace {

using namespace flow4d;

struct GlobalOpts {
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

bool endsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// out.json -> out<suffix>.json; other paths get the suffix appended.
std::string withSuffix(const std::string& path, const std::string& suffix) {
  if (endsWith(path, ".json"))
    return path.substr(0, path.size() - 5) + suffix + ".json";
  return path + suffix;
}

bool looksLikeNifti(const std::string& path) {
  return endsWith(path, ".nii") || endsWith(path, ".hdr") ||
         endsWith(path, ".img");
}

FeatureVolumeF loadFeatureNormalized(const std::string& path) {
  FeatureVolumeF f = readFeature(path);
  return f.normalized ? f : normalizeMinmax(f);
}

Mask loadMaskAny(const std::string& path, std::optional<long> label,
                 const GridMeta* reference) {
  Mask m;
  if (looksLikeNifti(path)) {
    m = maskFromNifti(readNifti1(path), label);
    if (reference != nullptr) {
      if (m.meta.dims != reference->dims)
        throw ValidationError("mask " + path + " has dims " +
                              std::to_string(m.meta.dims[0]) + "x" +
                              std::to_string(m.meta.dims[1]) + "x" +
                              std::to_string(m.meta.dims[2]) +
                              ", expected the feature grid");
      m.meta = *reference;  // NIfTI has no venc; adopt the feature's meta
    }
  } else {
    m = readMask(path);
  }
  return m;
}

nlohmann::json metricsJson(const MetricsReport& r) {
  nlohmann::json j;
  j["iou"] = r.iou;
  j["dice"] = r.dice;
  j["recall"] = r.recall;
  j["precision"] = r.precision;
  if (r.threshold) j["threshold"] = *r.threshold;
  return j;
}

void writeTextAtomic(const std::string& path, const std::string& text) {
  flow4d::detail::writeFileAtomic(path, text.data(), text.size());
}

// ---------------------------------------------------------------------------

void runPhantom(const GlobalOpts& global, const std::string& spec_path,
                const std::string& out_prefix,
                const std::string& write_default) {
  if (!write_default.empty()) {
    writePhantomSpec(PhantomSpec{}, write_default);
    std::cout << "wrote default phantom spec to " << write_default << "\n";
    return;
  }
  PhantomSpec spec = parsePhantomSpecFile(spec_path);
  if (global.seed) spec.rng_seed = *global.seed;
  const auto data = generate<float>(spec, global.threads);
  writeContainer(data.magnitude, out_prefix + ".mag.json");
  writeContainer(data.velocity, out_prefix + ".vel.json");
  writeContainer(data.mask, out_prefix + ".mask.json");
  std::cout << "phantom: " << spec.dims[0] << "x" << spec.dims[1] << "x"
            << spec.dims[2] << ", " << spec.n_frames << " frames, "
            << data.mask.count() << " vessel voxels\n";
}

void runWmf(const GlobalOpts& global, const std::string& vel_path,
            const std::string& out_path, bool per_component) {
  const auto vel = readVelocity(vel_path);
  const auto u = wmfComponent(vel, 0, global.threads);
  const auto v = wmfComponent(vel, 1, global.threads);
  const auto w = wmfComponent(vel, 2, global.threads);
  writeContainer(wmfMin(u, v, w), out_path);
  if (per_component) {
    writeContainer(u, withSuffix(out_path, ".u"));
    writeContainer(v, withSuffix(out_path, ".v"));
    writeContainer(w, withSuffix(out_path, ".w"));
  }
}

void runPcmra(const std::string& mag_path, const std::string& vel_path,
              std::optional<int> frame, bool systolic, double gamma,
              const std::string& out_path) {
  if (frame.has_value() == systolic)
    throw ValidationError("choose exactly one of --frame and --systolic");
  const auto mag = readMagnitude(mag_path);
  const auto vel = readVelocity(vel_path);
  FeatureVolumeF out;
  if (systolic) {
    out = pcmraSystolic(mag, vel, gamma);
    std::cout << "systolic frame: " << detectSystolicFrame(vel) << "\n";
  } else {
    out = pcmraFrame(mag, vel, *frame, gamma);
  }
  writeContainer(out, out_path);
}

void runCombine(const std::string& formula, const std::string& wmf_path,
                const std::string& mag_path, std::optional<int> frame,
                const std::string& pcmra_path,
                const std::string& pcmra_sys_path,
                const std::string& out_path) {
  const CombinationId id = combinationFromString(formula);

  std::optional<FeatureVolumeF> wmf, mag_t, pcmra_t, pcmra_sys;
  if (!wmf_path.empty()) wmf = loadFeatureNormalized(wmf_path);
  if (!mag_path.empty()) {
    if (!frame)
      throw ValidationError("--mag requires --frame to pick the time frame");
    mag_t = normalizeMinmax(magnitudeFrame(readMagnitude(mag_path), *frame));
  }
  if (!pcmra_path.empty()) pcmra_t = loadFeatureNormalized(pcmra_path);
  if (!pcmra_sys_path.empty())
    pcmra_sys = loadFeatureNormalized(pcmra_sys_path);

  const auto out = combine<float>(
      id, mag_t ? &*mag_t : nullptr, pcmra_t ? &*pcmra_t : nullptr,
      pcmra_sys ? &*pcmra_sys : nullptr, wmf ? &*wmf : nullptr);
  writeContainer(out, out_path);
}

void runSegment(const std::string& feature_path, const std::string& gt_path,
                std::optional<long> gt_label, const std::string& out_csv,
                const std::string& out_mask, const std::string& out_metrics) {
  const FeatureVolumeF f = loadFeatureNormalized(feature_path);
  const Mask gt = loadMaskAny(gt_path, gt_label, &f.meta);
  const ThresholdSweepResult sweep = sweepOptimalThreshold(f, gt);
  if (!out_csv.empty()) writeSweepCsv(sweep, out_csv);
  if (!out_mask.empty())
    writeContainer(applyThreshold(f, sweep.best_threshold), out_mask);
  const nlohmann::json j = metricsJson(sweep.best_metrics);
  if (!out_metrics.empty()) writeTextAtomic(out_metrics, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

void runEval(const std::string& pred_path, const std::string& gt_path,
             std::optional<long> pred_label, std::optional<long> gt_label,
             const std::string& out_metrics) {
  const Mask pred = loadMaskAny(pred_path, pred_label, nullptr);
  Mask gt = loadMaskAny(gt_path, gt_label, nullptr);
  if (pred.meta.dims != gt.meta.dims)
    throw ValidationError("prediction and ground truth dims differ");
  gt.meta = pred.meta;
  const nlohmann::json j = metricsJson(evaluate(pred, gt));
  if (!out_metrics.empty()) writeTextAtomic(out_metrics, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

void runExportChannels(const std::string& mag_path,
                       const std::string& vel_path,
                       const std::string& wmf_path,
                       const std::string& pcmra_path,
                       const std::string& pcmra_sys_path,
                       std::optional<int> frame, bool systolic,
                       const std::vector<std::string>& channels,
                       const std::string& out_path, int threads) {
  if (channels.empty()) throw ValidationError("no channels selected");

  std::optional<MagnitudeSeriesF> mag;
  std::optional<VelocitySeriesF> vel;
  const auto needMag = [&]() -> const MagnitudeSeriesF& {
    if (!mag) {
      if (mag_path.empty()) throw ValidationError("channel needs --mag");
      mag = readMagnitude(mag_path);
    }
    return *mag;
  };
  const auto needVel = [&]() -> const VelocitySeriesF& {
    if (!vel) {
      if (vel_path.empty()) throw ValidationError("channel needs --vel");
      vel = readVelocity(vel_path);
    }
    return *vel;
  };
  const auto needFrame = [&]() -> int {
    if (systolic) return detectSystolicFrame(needVel());
    if (!frame)
      throw ValidationError(
          "frame-dependent channel needs --frame or --systolic");
    return *frame;
  };

  std::vector<FeatureVolumeF> volumes;
  volumes.reserve(channels.size());
  for (const std::string& ch : channels) {
    if (ch == "mag") {
      volumes.push_back(
          normalizeMinmax(magnitudeFrame(needMag(), needFrame())));
    } else if (ch == "speed") {
      volumes.push_back(normalizeMinmax(speedFrame(needVel(), needFrame())));
    } else if (ch == "wmf") {
      if (wmf_path.empty()) {
        const auto& v = needVel();
        volumes.push_back(normalizeMinmax(
            wmfMin(wmfComponent(v, 0, threads), wmfComponent(v, 1, threads),
                   wmfComponent(v, 2, threads))));
      } else {
        volumes.push_back(loadFeatureNormalized(wmf_path));
      }
    } else if (ch == "pcmra_t") {
      if (!pcmra_path.empty()) {
        volumes.push_back(loadFeatureNormalized(pcmra_path));
      } else {
        volumes.push_back(normalizeMinmax(
            pcmraFrame(needMag(), needVel(), needFrame())));
      }
    } else if (ch == "pcmra_sys") {
      if (!pcmra_sys_path.empty()) {
        volumes.push_back(loadFeatureNormalized(pcmra_sys_path));
      } else {
        volumes.push_back(normalizeMinmax(pcmraSystolic(needMag(), needVel())));
      }
    } else {
      throw ValidationError("unknown channel '" + ch +
                            "' (use mag, speed, wmf, pcmra_t, pcmra_sys)");
    }
  }
  std::vector<const FeatureVolumeF*> refs;
  refs.reserve(volumes.size());
  for (const auto& v : volumes) refs.push_back(&v);
  exportChannels(refs, out_path);
}

void runRender(const std::string& in_path, const std::string& axis, int index,
               const std::string& out_path) {
  if (axis.size() != 1)
    throw ValidationError("axis must be one of x, y, z");
  const std::string kind = containerKind(in_path);
  if (kind == "mask") {
    renderSlice(readMask(in_path), axis[0], index, out_path);
  } else if (kind == "feature") {
    renderSlice(readFeature(in_path), axis[0], index, out_path);
  } else {
    throw ValidationError("render expects a feature or mask container, got '" +
                          kind + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D flow MRI feature extraction and threshold segmentation"};
  app.require_subcommand(1);

  GlobalOpts global;
  app.add_option("--threads", global.threads, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the phantom RNG seed");

  // phantom
  auto* phantom_cmd =
      app.add_subcommand("phantom", "generate a synthetic 4D flow dataset");
  phantom_cmd->fallthrough();
  std::string spec_path, out_prefix, write_default;
  auto* spec_opt = phantom_cmd->add_option("--spec", spec_path,
                                           "phantom spec (key = value file)")
                       ->check(CLI::ExistingFile);
  auto* prefix_opt = phantom_cmd->add_option(
      "--out-prefix", out_prefix, "prefix for .mag/.vel/.mask containers");
  phantom_cmd
      ->add_option("--write-default-spec", write_default,
                   "write a starter spec file and exit")
      ->excludes(spec_opt)
      ->excludes(prefix_opt);

  // wmf
  auto* wmf_cmd = app.add_subcommand(
      "wmf", "fused WMF volume from a velocity container");
  wmf_cmd->fallthrough();
  std::string wmf_vel, wmf_out;
  bool per_component = false;
  wmf_cmd->add_option("--vel", wmf_vel, "velocity container")->required();
  wmf_cmd->add_option("--out", wmf_out, "output feature container")
      ->required();
  wmf_cmd->add_flag("--per-component", per_component,
                    "also write the per-component WMF volumes");

  // pcmra
  auto* pcmra_cmd = app.add_subcommand("pcmra", "PC-MRA feature volume");
  pcmra_cmd->fallthrough();
  std::string pcmra_mag, pcmra_vel, pcmra_out;
  int pcmra_frame = 0;
  bool pcmra_systolic_flag = false;
  double gamma = kDefaultPcmraGamma;
  pcmra_cmd->add_option("--mag", pcmra_mag, "magnitude container")->required();
  pcmra_cmd->add_option("--vel", pcmra_vel, "velocity container")->required();
  auto* frame_opt =
      pcmra_cmd->add_option("--frame", pcmra_frame, "time frame index");
  pcmra_cmd->add_flag("--systolic", pcmra_systolic_flag,
                      "use the detected systolic frame");
  pcmra_cmd->add_option("--gamma", gamma, "speed compression exponent")
      ->capture_default_str();
  pcmra_cmd->add_option("--out", pcmra_out, "output feature container")
      ->required();

  // combine
  auto* combine_cmd = app.add_subcommand(
      "combine", "normalized feature combination for thresholding");
  combine_cmd->fallthrough();
  std::string formula, comb_wmf, comb_mag, comb_pcmra, comb_pcmra_sys,
      comb_out;
  int comb_frame = 0;
  combine_cmd
      ->add_option("--formula", formula,
                   "inv_wmf, mag_x_invwmf8, mag_div_wmf, mag_div_wmf2, "
                   "pcmra_div_wmf, pcmra_div_wmf2, pcmra_t, pcmra_sys")
      ->required();
  combine_cmd->add_option("--wmf", comb_wmf, "fused WMF feature container");
  combine_cmd->add_option("--mag", comb_mag, "magnitude container");
  auto* comb_frame_opt = combine_cmd->add_option(
      "--frame", comb_frame, "time frame for the magnitude channel");
  combine_cmd->add_option("--pcmra", comb_pcmra, "PC-MRA(t) feature container");
  combine_cmd->add_option("--pcmra-sys", comb_pcmra_sys,
                          "systolic PC-MRA feature container");
  combine_cmd->add_option("--out", comb_out, "output feature container")
      ->required();

  // segment
  auto* segment_cmd = app.add_subcommand(
      "segment", "optimal-threshold sweep against a ground-truth mask");
  segment_cmd->fallthrough();
  std::string seg_feature, seg_gt, seg_csv, seg_mask, seg_metrics;
  long seg_gt_label = 0;
  segment_cmd->add_option("--feature", seg_feature, "feature container")
      ->required();
  segment_cmd
      ->add_option("--gt", seg_gt,
                   "ground-truth mask (container or NIfTI label image)")
      ->required();
  auto* seg_label_opt = segment_cmd->add_option(
      "--gt-label", seg_gt_label, "NIfTI label value treated as foreground");
  segment_cmd->add_option("--out-csv", seg_csv, "sweep curve CSV");
  segment_cmd->add_option("--out-mask", seg_mask,
                          "mask at the optimal threshold");
  segment_cmd->add_option("--out-metrics", seg_metrics,
                          "metrics JSON at the optimal threshold");

  // eval
  auto* eval_cmd =
      app.add_subcommand("eval", "metrics between two segmentation masks");
  eval_cmd->fallthrough();
  std::string eval_pred, eval_gt, eval_out;
  long eval_pred_label = 0, eval_gt_label = 0;
  eval_cmd->add_option("--pred", eval_pred, "predicted mask")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth mask")->required();
  auto* eval_pred_label_opt =
      eval_cmd->add_option("--pred-label", eval_pred_label,
                           "NIfTI label value for the prediction");
  auto* eval_gt_label_opt = eval_cmd->add_option(
      "--gt-label", eval_gt_label, "NIfTI label value for the ground truth");
  eval_cmd->add_option("--out", eval_out, "metrics JSON file");

  // export-channels
  auto* export_cmd = app.add_subcommand(
      "export-channels", "stack feature channels for downstream learning");
  export_cmd->fallthrough();
  std::string exp_mag, exp_vel, exp_wmf, exp_pcmra, exp_pcmra_sys, exp_out,
      exp_channels;
  int exp_frame = 0;
  bool exp_systolic = false;
  export_cmd->add_option("--mag", exp_mag, "magnitude container");
  export_cmd->add_option("--vel", exp_vel, "velocity container");
  export_cmd->add_option("--wmf", exp_wmf, "precomputed fused WMF container");
  export_cmd->add_option("--pcmra", exp_pcmra,
                         "precomputed PC-MRA(t) container");
  export_cmd->add_option("--pcmra-sys", exp_pcmra_sys,
                         "precomputed systolic PC-MRA container");
  auto* exp_frame_opt =
      export_cmd->add_option("--frame", exp_frame, "time frame index");
  export_cmd->add_flag("--systolic", exp_systolic,
                       "use the detected systolic frame");
  export_cmd
      ->add_option("--channels", exp_channels,
                   "comma-separated: mag, speed, wmf, pcmra_t, pcmra_sys")
      ->required();
  export_cmd->add_option("--out", exp_out, "output channel container")
      ->required();

  // render
  auto* render_cmd =
      app.add_subcommand("render", "grayscale slice image (binary PGM)");
  render_cmd->fallthrough();
  std::string render_in, render_axis = "z", render_out;
  int render_index = 0;
  render_cmd->add_option("--in", render_in, "feature or mask container")
      ->required();
  render_cmd->add_option("--axis", render_axis, "slice axis: x, y or z")
      ->capture_default_str();
  render_cmd->add_option("--index", render_index, "slice index")->required();
  render_cmd->add_option("--out", render_out, "output image path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  if (seed_opt->count() > 0) global.seed = seed_value;

  try {
    if (phantom_cmd->parsed()) {
      if (write_default.empty() &&
          (spec_path.empty() || out_prefix.empty()))
        throw ValidationError("phantom needs --spec and --out-prefix "
                              "(or --write-default-spec)");
      runPhantom(global, spec_path, out_prefix, write_default);
    } else if (wmf_cmd->parsed()) {
      runWmf(global, wmf_vel, wmf_out, per_component);
    } else if (pcmra_cmd->parsed()) {
      runPcmra(pcmra_mag, pcmra_vel,
               frame_opt->count() ? std::optional<int>(pcmra_frame)
                                  : std::nullopt,
               pcmra_systolic_flag, gamma, pcmra_out);
    } else if (combine_cmd->parsed()) {
      runCombine(formula, comb_wmf, comb_mag,
                 comb_frame_opt->count() ? std::optional<int>(comb_frame)
                                         : std::nullopt,
                 comb_pcmra, comb_pcmra_sys, comb_out);
    } else if (segment_cmd->parsed()) {
      runSegment(seg_feature, seg_gt,
                 seg_label_opt->count() ? std::optional<long>(seg_gt_label)
                                        : std::nullopt,
                 seg_csv, seg_mask, seg_metrics);
    } else if (eval_cmd->parsed()) {
      runEval(eval_pred, eval_gt,
              eval_pred_label_opt->count()
                  ? std::optional<long>(eval_pred_label)
                  : std::nullopt,
              eval_gt_label_opt->count() ? std::optional<long>(eval_gt_label)
                                         : std::nullopt,
              eval_out);
    } else if (export_cmd->parsed()) {
      std::vector<std::string> channels;
      std::string token;
      std::istringstream list(exp_channels);
      while (std::getline(list, token, ','))
        if (!token.empty()) channels.push_back(token);
      runExportChannels(exp_mag, exp_vel, exp_wmf, exp_pcmra, exp_pcmra_sys,
                        exp_frame_opt->count() ? std::optional<int>(exp_frame)
                                               : std::nullopt,
                        exp_systolic, channels, exp_out, global.threads);
    } else if (render_cmd->parsed()) {
      runRender(render_in, render_axis, render_index, render_out);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
