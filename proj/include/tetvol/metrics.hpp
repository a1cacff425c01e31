// ======================================================================== //
// Copyright 2026 The tetvol Authors                                        //
//                                                                          //
// Licensed under the Apache License, Version 2.0 (the "License");          //
// you may not use this file except in compliance with the License.         //
// You may obtain a copy of the License at                                  //
//                                                                          //
//     http://www.apache.org/licenses/LICENSE-2.0                           //
//                                                                          //
// Unless required by applicable law or agreed to in writing, software      //
// distributed under the License is distributed on an "AS IS" BASIS,        //
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. //
// See the License for the specific language governing permissions and      //
// limitations under the License.                                           //
// ======================================================================== //

#pragma once

#include "tetvol/image.hpp"

#include <cinttypes>
#include <cstdio>

namespace tetvol {

  /// Canonical SSIM settings: 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
  /// dynamic range 255, computed on Rec.709 luminance of the 8-bit RGB values.
  struct SsimConfig {
    int    window      = 11;
    double sigma       = 1.5;
    double k1          = 0.01;
    double k2          = 0.03;
    double dynamic_range = 255.0;
  };

  inline std::vector<double> luminance(const Image8 &img)
  {
    std::vector<double> y(std::size_t(img.width) * img.height);
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = 0.2126 * img.rgb[3 * i] + 0.7152 * img.rgb[3 * i + 1] + 0.0722 * img.rgb[3 * i + 2];
    return y;
  }

  inline std::vector<double> gaussian_kernel(int size, double sigma)
  {
    std::vector<double> k(size);
    const double        c   = 0.5 * (size - 1);
    double              sum = 0.0;
    for (int i = 0; i < size; ++i) {
      k[i] = std::exp(-(i - c) * (i - c) / (2.0 * sigma * sigma));
      sum += k[i];
    }
    for (double &v : k) v /= sum;
    return k;
  }

  /// Mean SSIM over every window position that fits inside the image.
  inline double ssim(const Image8 &a, const Image8 &b, const SsimConfig &config = {})
  {
    if (a.width != b.width || a.height != b.height) throw ImageError("SSIM needs images of equal size");
    const int W = a.width, H = a.height, K = config.window;
    if (W < K || H < K) throw ImageError("image smaller than the SSIM window");

    const std::vector<double> ya = luminance(a), yb = luminance(b);
    const std::vector<double> kernel = gaussian_kernel(K, config.sigma);
    const int OW = W - K + 1, OH = H - K + 1;

    // separable valid-mode filter
    auto filter = [&](auto &&pixel) {
      std::vector<double> tmp(std::size_t(OW) * H), out(std::size_t(OW) * OH);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < OW; ++x) {
          double s = 0.0;
          for (int k = 0; k < K; ++k) s += kernel[k] * pixel(std::size_t(y) * W + x + k);
          tmp[std::size_t(y) * OW + x] = s;
        }
      for (int y = 0; y < OH; ++y)
        for (int x = 0; x < OW; ++x) {
          double s = 0.0;
          for (int k = 0; k < K; ++k) s += kernel[k] * tmp[std::size_t(y + k) * OW + x];
          out[std::size_t(y) * OW + x] = s;
        }
      return out;
    };
    const auto mu_a = filter([&](std::size_t i) { return ya[i]; });
    const auto mu_b = filter([&](std::size_t i) { return yb[i]; });
    const auto aa   = filter([&](std::size_t i) { return ya[i] * ya[i]; });
    const auto bb   = filter([&](std::size_t i) { return yb[i] * yb[i]; });
    const auto ab   = filter([&](std::size_t i) { return ya[i] * yb[i]; });

    const double c1 = (config.k1 * config.dynamic_range) * (config.k1 * config.dynamic_range);
    const double c2 = (config.k2 * config.dynamic_range) * (config.k2 * config.dynamic_range);
    double       total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double ma = mu_a[i], mb = mu_b[i];
      const double va = aa[i] - ma * ma, vb = bb[i] - mb * mb, cov = ab[i] - ma * mb;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
  }

  // ------------------------------------------------------------------
  // quality vs. max step sweeps
  // ------------------------------------------------------------------

  struct SweepRow {
    double        s2      = 0.0;
    double        fps     = 0.0;
    std::uint64_t samples = 0;
    double        ssim    = 0.0;
  };

  struct SweepResult {
    std::vector<SweepRow> rows; ///< ascending s2
    std::uint64_t         reference_samples = 0;
    double                reference_fps     = 0.0;
  };

  struct SweepOptions {
    int      warmup_frames = 1;
    int      timing_frames = 5; ///< fps is 1000 / median frame time over these
    Rgba     background{0, 0, 0, 1};
    unsigned threads = 0;
  };

  struct TimedRender {
    Framebuffer fb;
    RenderStats stats;
    double      fps = 0.0;
  };

  inline TimedRender timed_render(const Scene &scene, const Camera &camera, const RenderOptions &options,
                                  const SweepOptions &timing)
  {
    TimedRender out;
    for (int i = 0; i < timing.warmup_frames; ++i) render(scene, camera, options);
    std::vector<double> ms;
    const int           frames = std::max(1, timing.timing_frames);
    for (int i = 0; i < frames; ++i) {
      RenderStats stats;
      Framebuffer fb = render(scene, camera, options, &stats);
      ms.push_back(stats.ms);
      if (i == 0) {
        out.fb    = std::move(fb);
        out.stats = std::move(stats);
      }
    }
    std::sort(ms.begin(), ms.end());
    const double median = ms.size() % 2 ? ms[ms.size() / 2] : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
    out.fps             = median > 0.0 ? 1000.0 / median : 0.0;
    return out;
  }

  /// Renders the Reference image once, then SkipAdaptive for each s2, recording samples,
  /// frame rate, and SSIM against the reference.
  inline SweepResult run_sweep(const Scene &scene, const Camera &camera, const AdaptiveParams &base,
                               std::vector<double> s2_values, const SweepOptions &options = {})
  {
    std::sort(s2_values.begin(), s2_values.end());
    RenderOptions ro;
    ro.params     = base;
    ro.background = options.background;
    ro.threads    = options.threads;

    ro.mode              = RenderMode::Reference;
    const TimedRender ref = timed_render(scene, camera, ro, options);
    const Image8      ref_img = to_image(ref.fb);

    SweepResult result;
    result.reference_samples = ref.stats.total_samples;
    result.reference_fps     = ref.fps;
    ro.mode                  = RenderMode::SkipAdaptive;
    for (double s2 : s2_values) {
      ro.params.s2       = s2;
      const TimedRender r = timed_render(scene, camera, ro, options);
      result.rows.push_back({s2, r.fps, r.stats.total_samples, ssim(ref_img, to_image(r.fb))});
    }
    return result;
  }

  inline std::string format_row(const SweepRow &row)
  {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.6g,%.3f,%" PRIu64 ",%.6f", row.s2, row.fps, row.samples, row.ssim);
    return buf;
  }

  /// CSV with header `s2,fps,samples,ssim`.
  inline void write_sweep_csv(std::ostream &out, const SweepResult &result)
  {
    out << "s2,fps,samples,ssim\n";
    for (const SweepRow &row : result.rows) out << format_row(row) << '\n';
  }

} // namespace tetvol
