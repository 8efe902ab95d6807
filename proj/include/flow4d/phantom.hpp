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

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "flow4d/errors.hpp"
#include "flow4d/parallel.hpp"
#include "flow4d/rng.hpp"
#include "flow4d/spectral.hpp"
#include "flow4d/volume.hpp"

namespace flow4d {

enum class PhantomGeometry { StraightTube, UArch };
enum class WaveformKind { SystolicPulse, PureHarmonic };

/// Synthetic 4D flow dataset description. The vessel is an analytic tube
/// (straight, or an inverted-U arch with two straight limbs) carrying a
/// parabolic cross-sectional speed profile scaled by a cardiac waveform.
/// Noise follows the phase-contrast relation: velocity noise scales with
/// VENC over the local anatomical SNR, so dim-signal regions are noisy.
struct PhantomSpec {
  PhantomGeometry geometry = PhantomGeometry::StraightTube;
  double radius_mm = 8.0;            // lumen radius
  double arch_radius_mm = 30.0;      // centerline radius of the arch
  Eigen::Vector3i dims{49, 49, 49};
  Eigen::Vector3d spacing_mm{2.5, 2.5, 2.5};
  int n_frames = 20;                 // cardiac frames T
  double venc = 1.5;                 // m/s
  double peak_velocity = 1.0;        // centerline peak speed at systole, m/s
  int systolic_frame = 5;
  WaveformKind waveform = WaveformKind::SystolicPulse;
  int harmonic = 1;                  // cycles per cardiac cycle (pure_harmonic)
  double diastolic_tail = 0.15;      // diastolic flow as a fraction of peak
  double pulse_width_frames = 2.5;   // gaussian sigma of the systolic bump
  double snr_mag = 20.0;             // anatomical SNR in the vessel; inf = clean
  double background_mag_level = 0.7; // background / vessel magnitude ratio
  std::uint64_t rng_seed = 1;
};

template <typename Scalar = float>
struct PhantomVolumes {
  MagnitudeSeries<Scalar> magnitude;
  VelocitySeries<Scalar> velocity;
  Mask mask;  // exact in-vessel voxels (centerline distance <= radius)
};

inline GridMeta phantomMeta(const PhantomSpec& spec) {
  GridMeta meta;
  meta.dims = spec.dims;
  meta.spacing = spec.spacing_mm;
  meta.n_frames = spec.n_frames;
  meta.venc = spec.venc;
  return meta;
}

inline std::vector<std::string> specViolations(const PhantomSpec& spec) {
  std::vector<std::string> out;
  for (auto& v : metaViolations(phantomMeta(spec))) out.push_back(v);
  if (!(spec.peak_velocity > 0.0) || spec.peak_velocity > spec.venc)
    out.push_back("peak_velocity must be in (0, venc]");
  if (spec.radius_mm < 2.0 * spec.spacing_mm.maxCoeff())
    out.push_back("radius_mm must be >= 2 * max(spacing): vessel must span at "
                  "least 4 voxels across");
  if (spec.systolic_frame < 0 || spec.systolic_frame >= spec.n_frames)
    out.push_back("systolic_frame out of range");
  if (spec.waveform == WaveformKind::PureHarmonic &&
      (spec.harmonic < 1 || spec.harmonic > spec.n_frames / 2))
    out.push_back("harmonic must be in [1, n_frames/2]");
  if (spec.diastolic_tail < 0.0 || spec.diastolic_tail >= 1.0)
    out.push_back("diastolic_tail must be in [0, 1)");
  if (!(spec.pulse_width_frames > 0.0))
    out.push_back("pulse_width_frames must be > 0");
  if (!(spec.snr_mag > 0.0))  // +inf is allowed (noiseless)
    out.push_back("snr_mag must be > 0 (or inf)");
  if (spec.background_mag_level < 0.0 || spec.background_mag_level > 1.0)
    out.push_back("background_mag_level must be in [0, 1]");
  if (spec.geometry == PhantomGeometry::UArch &&
      spec.arch_radius_mm < 2.0 * spec.radius_mm)
    out.push_back("arch_radius_mm must be >= 2 * radius_mm");
  return out;
}

/// Waveform scale factor at frame t, in [-1, 1].
inline double waveformValue(const PhantomSpec& spec, int t) {
  const int T = spec.n_frames;
  if (spec.waveform == WaveformKind::PureHarmonic) {
    return std::cos(2.0 * M_PI * double(spec.harmonic) * double(t) / double(T));
  }
  // Smooth systolic bump on top of a low diastolic tail, periodic in t.
  const double dt = std::abs(double(t - spec.systolic_frame));
  const double dc = std::min(dt, double(T) - dt);
  const double sigma = spec.pulse_width_frames;
  return spec.diastolic_tail +
         (1.0 - spec.diastolic_tail) * std::exp(-dc * dc / (2.0 * sigma * sigma));
}

namespace detail {

struct CenterlineSample {
  double distance_mm = 0.0;            // to the vessel centerline
  Eigen::Vector3d direction{0, 0, 1};  // unit flow direction
};

/// Distance and flow direction at a physical position (mm). The arch is an
/// inverted U in the x-z plane: ascending limb at x = cx + R going +z, half
/// torus above the volume midplane, descending limb at x = cx - R going -z.
inline CenterlineSample centerlineAt(const PhantomSpec& spec,
                                     const Eigen::Vector3d& pos_mm) {
  const Eigen::Vector3d center =
      0.5 * (spec.dims.cast<double>().array() * spec.spacing_mm.array())
                .matrix();
  CenterlineSample s;
  if (spec.geometry == PhantomGeometry::StraightTube) {
    s.distance_mm =
        std::hypot(pos_mm[0] - center[0], pos_mm[1] - center[1]);
    s.direction = Eigen::Vector3d(0, 0, 1);
    return s;
  }
  const double ra = spec.arch_radius_mm;
  const double dx = pos_mm[0] - center[0];
  const double dy = pos_mm[1] - center[1];
  const double dz = pos_mm[2] - center[2];
  if (dz > 0.0) {
    const double rho = std::hypot(dx, dz);
    const double theta = std::atan2(dz, dx);  // in (0, pi)
    s.distance_mm = std::hypot(rho - ra, dy);
    s.direction = Eigen::Vector3d(-std::sin(theta), 0.0, std::cos(theta));
  } else {
    const double d_asc = std::hypot(dx - ra, dy);
    const double d_desc = std::hypot(dx + ra, dy);
    if (d_asc <= d_desc) {
      s.distance_mm = d_asc;
      s.direction = Eigen::Vector3d(0, 0, 1);
    } else {
      s.distance_mm = d_desc;
      s.direction = Eigen::Vector3d(0, 0, -1);
    }
  }
  return s;
}

}  // namespace detail

/// Generates the phantom: magnitude, velocity and the exact in-vessel mask.
///
/// In-vessel voxels carry a Poiseuille profile peak * (1 - (d/R)^2) along
/// the local centerline direction, scaled by the waveform. Velocity noise is
/// Gaussian with per-voxel std sigma_v = (sqrt(2)/pi) * venc / SNR_local,
/// where SNR_local is the per-voxel magnitude SNR, capped at the
/// uniform-phase limit venc/sqrt(3); samples are clamped to [-venc, venc],
/// the representable range. Magnitude noise is Gaussian at snr_mag, clamped
/// at zero (Rician approximation). All draws come from counter-based streams
/// keyed by (seed, stream, sample index), so output is bit-reproducible for
/// any thread count.
template <typename Scalar = float>
PhantomVolumes<Scalar> generate(const PhantomSpec& spec, int threads = 1) {
  if (auto v = specViolations(spec); !v.empty())
    throw ValidationError("invalid phantom spec: " + v.front());

  const GridMeta meta = phantomMeta(spec);
  const Index nvox = meta.numVoxels();
  const int T = meta.n_frames;

  PhantomVolumes<Scalar> out;
  out.magnitude.meta = meta;
  out.velocity.meta = meta;
  out.mask.meta = meta;
  out.magnitude.values.resize(nvox * T);
  for (auto& comp : out.velocity.components) comp.resize(nvox * T);
  out.mask.values.resize(nvox);

  std::vector<double> waveform(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) waveform[size_t(t)] = waveformValue(spec, t);

  const bool noiseless = std::isinf(spec.snr_mag);
  const double sigma_mag = noiseless ? 0.0 : 1.0 / spec.snr_mag;
  const double sigma_v_cap = spec.venc / std::sqrt(3.0);
  const double sigma_v_scale = std::sqrt(2.0) / M_PI * spec.venc;

  parallelChunks(nvox, 1024, threads, [&](Index begin, Index end) {
    for (Index j = begin; j < end; ++j) {
      const auto c = meta.coords(j);
      const Eigen::Vector3d pos(
          (double(c[0]) + 0.5) * meta.spacing[0],
          (double(c[1]) + 0.5) * meta.spacing[1],
          (double(c[2]) + 0.5) * meta.spacing[2]);
      const auto line = detail::centerlineAt(spec, pos);
      const bool inside = line.distance_mm <= spec.radius_mm;
      out.mask.values[j] = inside;

      const double ratio = line.distance_mm / spec.radius_mm;
      const double profile = inside ? 1.0 - ratio * ratio : 0.0;
      const double clean_mag = inside ? 1.0 : spec.background_mag_level;

      double sigma_v = 0.0;
      if (!noiseless) {
        const double snr_local = spec.snr_mag * clean_mag;
        sigma_v = snr_local > 0.0
                      ? std::min(sigma_v_scale / snr_local, sigma_v_cap)
                      : sigma_v_cap;
      }

      for (int t = 0; t < T; ++t) {
        const Index flat = j + nvox * Index(t);
        const double amp = spec.peak_velocity * profile * waveform[size_t(t)];
        double u = line.direction[0] * amp;
        double v = line.direction[1] * amp;
        double w = line.direction[2] * amp;
        double m = clean_mag;
        if (!noiseless) {
          const auto g_mag =
              rng::gaussianPair(spec.rng_seed, 0, std::uint64_t(flat));
          const auto g_uv =
              rng::gaussianPair(spec.rng_seed, 1, std::uint64_t(flat));
          const auto g_w =
              rng::gaussianPair(spec.rng_seed, 2, std::uint64_t(flat));
          m = std::max(0.0, m + sigma_mag * g_mag.a);
          u = std::clamp(u + sigma_v * g_uv.a, -spec.venc, spec.venc);
          v = std::clamp(v + sigma_v * g_uv.b, -spec.venc, spec.venc);
          w = std::clamp(w + sigma_v * g_w.a, -spec.venc, spec.venc);
        }
        out.magnitude.values[flat] = Scalar(m);
        out.velocity.components[0][flat] = Scalar(u);
        out.velocity.components[1][flat] = Scalar(v);
        out.velocity.components[2][flat] = Scalar(w);
      }
    }
  });
  return out;
}

/// Point-wise diagnostics: speed over time, the per-component energy
/// spectra and per-component WMF at chosen voxels. Pure read.
template <typename Scalar>
struct PointProbe {
  Eigen::Vector3i voxel;
  Eigen::ArrayXd speed;             // per frame, m/s
  std::array<Spectrum, 3> spectra;  // u, v, w
  Eigen::Vector3d wmf;              // per-component WMF
};

template <typename Scalar>
std::vector<PointProbe<Scalar>> fig1Probe(
    const VelocitySeries<Scalar>& vel,
    const std::vector<Eigen::Vector3i>& points) {
  const GridMeta& meta = vel.meta;
  const Index nvox = meta.numVoxels();
  const double eps = defaultEnergyEpsilon(meta.n_frames, meta.venc);
  std::vector<PointProbe<Scalar>> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    if (!meta.inRange(p[0], p[1], p[2]))
      throw ValidationError("probe point out of range: (" +
                            std::to_string(p[0]) + ", " + std::to_string(p[1]) +
                            ", " + std::to_string(p[2]) + ")");
    PointProbe<Scalar> probe;
    probe.voxel = p;
    probe.speed.resize(meta.n_frames);
    const Index spatial = meta.spatialIndex(p[0], p[1], p[2]);
    Eigen::ArrayXd series(meta.n_frames);
    for (int comp = 0; comp < 3; ++comp) {
      for (int t = 0; t < meta.n_frames; ++t)
        series[t] = double(vel.components[size_t(comp)][spatial + nvox * t]);
      probe.spectra[size_t(comp)] = energySpectrum(series);
      probe.wmf[comp] = wmfScalar(probe.spectra[size_t(comp)], eps);
    }
    for (int t = 0; t < meta.n_frames; ++t) {
      double s2 = 0.0;
      for (int comp = 0; comp < 3; ++comp) {
        const double v = double(vel.components[size_t(comp)][spatial + nvox * t]);
        s2 += v * v;
      }
      probe.speed[t] = std::sqrt(s2);
    }
    out.push_back(std::move(probe));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Human-editable key = value config for PhantomSpec.
// ---------------------------------------------------------------------------

inline const char* to_string(PhantomGeometry g) {
  return g == PhantomGeometry::StraightTube ? "straight_tube" : "u_arch";
}
inline const char* to_string(WaveformKind w) {
  return w == WaveformKind::SystolicPulse ? "systolic_pulse" : "pure_harmonic";
}
inline std::ostream& operator<<(std::ostream& os, PhantomGeometry g) {
  return os << to_string(g);
}
inline std::ostream& operator<<(std::ostream& os, WaveformKind w) {
  return os << to_string(w);
}

inline void writePhantomSpec(const PhantomSpec& spec, std::ostream& os) {
  os << "geometry = " << to_string(spec.geometry) << "\n";
  os << "radius_mm = " << spec.radius_mm << "\n";
  os << "arch_radius_mm = " << spec.arch_radius_mm << "\n";
  os << "dims = " << spec.dims[0] << " " << spec.dims[1] << " " << spec.dims[2]
     << "\n";
  os << "spacing_mm = " << spec.spacing_mm[0] << " " << spec.spacing_mm[1]
     << " " << spec.spacing_mm[2] << "\n";
  os << "n_frames = " << spec.n_frames << "\n";
  os << "venc = " << spec.venc << "\n";
  os << "peak_velocity = " << spec.peak_velocity << "\n";
  os << "systolic_frame = " << spec.systolic_frame << "\n";
  os << "waveform = " << to_string(spec.waveform) << "\n";
  os << "harmonic = " << spec.harmonic << "\n";
  os << "diastolic_tail = " << spec.diastolic_tail << "\n";
  os << "pulse_width_frames = " << spec.pulse_width_frames << "\n";
  if (std::isinf(spec.snr_mag))
    os << "snr_mag = inf\n";
  else
    os << "snr_mag = " << spec.snr_mag << "\n";
  os << "background_mag_level = " << spec.background_mag_level << "\n";
  os << "rng_seed = " << spec.rng_seed << "\n";
}

inline void writePhantomSpec(const PhantomSpec& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  writePhantomSpec(spec, os);
}

inline PhantomSpec parsePhantomSpec(std::istream& is) {
  PhantomSpec spec;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw ValidationError("phantom spec line " + std::to_string(line_no) +
                          ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    std::istringstream vs(value);
    const auto number = [&](auto& target) {
      if (!(vs >> target)) fail("cannot parse value for " + key);
    };
    if (key == "geometry") {
      if (value == "straight_tube")
        spec.geometry = PhantomGeometry::StraightTube;
      else if (value == "u_arch")
        spec.geometry = PhantomGeometry::UArch;
      else
        fail("unknown geometry: " + value);
    } else if (key == "radius_mm") number(spec.radius_mm);
    else if (key == "arch_radius_mm") number(spec.arch_radius_mm);
    else if (key == "dims") {
      if (!(vs >> spec.dims[0] >> spec.dims[1] >> spec.dims[2]))
        fail("dims needs three integers");
    } else if (key == "spacing_mm") {
      if (!(vs >> spec.spacing_mm[0] >> spec.spacing_mm[1] >>
            spec.spacing_mm[2]))
        fail("spacing_mm needs three numbers");
    } else if (key == "n_frames") number(spec.n_frames);
    else if (key == "venc") number(spec.venc);
    else if (key == "peak_velocity") number(spec.peak_velocity);
    else if (key == "systolic_frame") number(spec.systolic_frame);
    else if (key == "waveform") {
      if (value == "systolic_pulse")
        spec.waveform = WaveformKind::SystolicPulse;
      else if (value == "pure_harmonic")
        spec.waveform = WaveformKind::PureHarmonic;
      else
        fail("unknown waveform: " + value);
    } else if (key == "harmonic") number(spec.harmonic);
    else if (key == "diastolic_tail") number(spec.diastolic_tail);
    else if (key == "pulse_width_frames") number(spec.pulse_width_frames);
    else if (key == "snr_mag") {
      if (value == "inf" || value == "+inf")
        spec.snr_mag = std::numeric_limits<double>::infinity();
      else
        number(spec.snr_mag);
    } else if (key == "background_mag_level") number(spec.background_mag_level);
    else if (key == "rng_seed") number(spec.rng_seed);
    else fail("unknown key: " + key);
  }
  return spec;
}

inline PhantomSpec parsePhantomSpecFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open phantom spec: " + path);
  return parsePhantomSpec(is);
}

}  // namespace flow4d
