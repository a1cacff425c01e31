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

#include "tetvol/scene.hpp"

#include <chrono>
#include <cmath>
#include <string_view>

namespace tetvol {

  struct RenderError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  enum class RenderMode { Reference, SkipOnly, SkipAdaptive };

  inline constexpr std::string_view to_string(RenderMode m)
  {
    switch (m) {
    case RenderMode::Reference: return "reference";
    case RenderMode::SkipOnly: return "skip";
    case RenderMode::SkipAdaptive: return "skip-adaptive";
    }
    return "?";
  }

  inline RenderMode parse_mode(std::string_view name)
  {
    for (auto m : {RenderMode::Reference, RenderMode::SkipOnly, RenderMode::SkipAdaptive})
      if (name == to_string(m)) return m;
    throw std::invalid_argument("unknown render mode '" + std::string(name) + "'");
  }

  /// Step-size controls: s1 is the finest step (also the opacity reference length), s2 the
  /// coarsest, p the adaptive power. s1 == s2 turns adaptivity off.
  struct AdaptiveParams {
    double s1                  = 0.1;
    double s2                  = 0.1;
    double p                   = 1.0;
    double termination_opacity = 0.99; ///< 1 terminates only on full opacity
    bool   jitter              = false;

    void validate() const
    {
      if (!(s1 > 0.0)) throw std::invalid_argument("s1 must be > 0");
      if (!(s2 >= s1)) throw std::invalid_argument("s2 must be >= s1");
      if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
      if (!(termination_opacity >= 0.0 && termination_opacity <= 1.0))
        throw std::invalid_argument("termination_opacity must lie in [0,1]");
    }
  };

  /// s = max(s1 + (s2 - s1) |min(sigma, 1) - 1|^p, s1)
  inline double compute_step_size(const AdaptiveParams &params, double sigma)
  {
    return std::max(params.s1 + (params.s2 - params.s1) * std::pow(std::abs(std::min(sigma, 1.0) - 1.0), params.p),
                    params.s1);
  }

  /// Opacity of a sample spanning length s, given alpha defined per base length s1.
inline double correct_opacity(double alpha, double s, double s1) { return 1.0 - std::pow(1.0 - alpha, s / s1); }

  struct Camera {
    Vec3   position{0, 0, -5};
    Vec3   look_at{0, 0, 0};
    Vec3   up{0, 1, 0};
    double fov_deg = 45.0; ///< vertical
    int    width   = 256;
    int    height  = 256;

    void validate() const
    {
      if (width < 1 || height < 1) throw std::invalid_argument("image size must be at least 1x1");
      if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("fov must lie in (0,180) degrees");
      const Vec3 f = look_at - position;
      if (!(length(f) > 0.0)) throw std::invalid_argument("camera position equals look_at");
      if (!(length(cross(normalize(f), up)) > 1e-9)) throw std::invalid_argument("camera up is parallel to view");
    }

    /// Ray through the center of pixel (x, y); y = 0 is the top row.
    Ray primary_ray(int x, int y) const
    {
      const Vec3   forward = normalize(look_at - position);
      const Vec3   right   = normalize(cross(forward, up));
      const Vec3   v_up    = cross(right, forward);
      const double tan_h   = std::tan(0.5 * fov_deg * 3.14159265358979323846 / 180.0);
      const double aspect  = static_cast<double>(width) / static_cast<double>(height);
      const double u       = (2.0 * (x + 0.5) / width - 1.0) * tan_h * aspect;
      const double v       = (1.0 - 2.0 * (y + 0.5) / height) * tan_h;
      return Ray{position, normalize(forward + u * right + v * v_up), 0.0, std::numeric_limits<double>::infinity()};
    }
  };

  struct Framebuffer {
    int                        width  = 0;
    int                        height = 0;
    std::vector<Rgba>          rgba;    ///< non-premultiplied, composited over background
    std::vector<std::uint32_t> samples; ///< point queries per pixel
    Rgba                       background{0, 0, 0, 1};
  };

  struct RenderStats {
    std::uint64_t              total_samples      = 0;
    std::uint64_t              partitions_visited = 0; ///< summed over pixels
    std::uint32_t              partitions         = 0;
    double                     ms                 = 0.0;
    std::vector<std::uint64_t> partition_samples; ///< samples taken inside each partition

    double partitions_visited_mean(std::size_t pixels) const
    {
      return pixels ? static_cast<double>(partitions_visited) / static_cast<double>(pixels) : 0.0;
    }
  };

  /// Premultiplied front-to-back accumulator.
  struct Accum {
    Vec3   color;
    double opacity = 0.0;
  };

  struct MarchResult {
    std::uint64_t samples    = 0;
    bool          terminated = false;
  };

  /// Ray-marches [t_enter, t_exit] with the given step. Full steps are sampled at their
  /// midpoints t_enter + (k + 1/2) step; a trailing partial step is sampled at its own
  /// midpoint and opacity-corrected for its actual length, so the integrated opacity of
  /// a homogeneous medium does not depend on the step. `phase` replaces the 1/2 when
  /// jittering.
  inline MarchResult march_partition(const MeshSampler &sampler, const TransferFunction &tf, const Ray &ray,
                                     double t_enter, double t_exit, double step, const AdaptiveParams &params,
                                     Accum &accum, double phase = 0.5)
  {
    MarchResult  result;
    const double span = t_exit - t_enter;
    if (!(span > 0.0)) return result;
    const auto count = static_cast<std::uint64_t>(std::max(1.0, std::ceil(span / step - 1e-9)));
    for (std::uint64_t k = 0; k < count; ++k) {
      const double seg_start = t_enter + static_cast<double>(k) * step;
      double       seg_len   = step;
      double       t         = t_enter + (static_cast<double>(k) + phase) * step;
      if (k + 1 == count) {
        const double rest = t_exit - seg_start;
        if (rest < step * (1.0 - 1e-9)) {
          seg_len = rest;
          t       = seg_start + phase * rest;
        }
      }
      ++result.samples;
      const std::optional<double> value = sampler.sample(ray.origin + t * ray.direction);
      if (!value) continue;
      const Rgba c = tf.lookup(*value);
      if (c.a <= 0.0) continue;
      const double alpha  = correct_opacity(c.a, seg_len, params.s1);
      const double weight = (1.0 - accum.opacity) * alpha;
      accum.color += weight * Vec3(c.r, c.g, c.b);
      accum.opacity += weight;
      if (accum.opacity >= params.termination_opacity) {
        result.terminated = true;
        break;
      }
    }
    return result;
  }

  struct RenderOptions {
    RenderMode     mode = RenderMode::SkipAdaptive;
    AdaptiveParams params;
    Rgba           background{0, 0, 0, 1};
    unsigned       threads = 0; ///< 0 = hardware concurrency
  };

  namespace detail {
    /// Deterministic per-pixel value in [0,1).
    inline double pixel_hash(int x, int y)
    {
      std::uint32_t h = static_cast<std::uint32_t>(x) * 0x8da6b343u ^ static_cast<std::uint32_t>(y) * 0xd8163841u;
      h ^= h >> 16;
      h *= 0x7feb352du;
      h ^= h >> 15;
      h *= 0x846ca68bu;
      h ^= h >> 16;
      return static_cast<double>(h) / 4294967296.0;
    }

    inline Rgba composite_background(const Accum &acc, const Rgba &bg)
    {
      const double rest = 1.0 - acc.opacity;
      const double a    = acc.opacity + rest * bg.a;
      if (!(a > 0.0)) return {0, 0, 0, 0};
      const Vec3 c = acc.color + (rest * bg.a) * Vec3(bg.r, bg.g, bg.b);
      return {c.x / a, c.y / a, c.z / a, a};
    }
  } // namespace detail

  /// Renders one frame. Reference marches the ray's clip against the mesh bounds at s1
  /// with no acceleration structure; SkipOnly marches each active partition at s1;
  /// SkipAdaptive picks each partition's step from its normalized variance.
  inline Framebuffer render(const Scene &scene, const Camera &camera, const RenderOptions &options,
                            RenderStats *stats_out = nullptr)
  {
    if (!scene.built()) throw RenderError("scene is not built");
    if (camera.width < 1 || camera.height < 1) throw RenderError("zero-size image");
    try {
      camera.validate();
      options.params.validate();
    } catch (const std::invalid_argument &e) {
      throw RenderError(e.what());
    }
    const auto start = std::chrono::steady_clock::now();

    const int         W = camera.width, H = camera.height;
    const std::size_t P = scene.partitions().size();
    Framebuffer       fb;
    fb.width      = W;
    fb.height     = H;
    fb.background = options.background;
    fb.rgba.assign(std::size_t(W) * H, Rgba{});
    fb.samples.assign(std::size_t(W) * H, 0);

    std::vector<std::atomic<std::uint64_t>> partition_samples(P);
    std::vector<std::uint32_t>              visited(std::size_t(W) * H, 0);

    const auto            &params    = options.params;
    const auto            &sampler   = scene.sampler();
    const auto            &tf        = scene.transfer_function();
    const auto            &metas     = scene.metas();
    const TraversalConfig &traversal = scene.traversal();

    auto shade = [&](int x, int y) {
      const Ray    ray   = camera.primary_ray(x, y);
      const double phase = params.jitter ? detail::pixel_hash(x, y) : 0.5;
      Accum         acc;
      std::uint64_t samples = 0;
      std::uint32_t parts   = 0;
      if (options.mode == RenderMode::Reference) {
        auto [t0, t1] = slab_interval(ray.origin, ray.direction, scene.mesh().bounds);
        t0 = std::max(t0, ray.t_min);
        if (t1 > t0) samples += march_partition(sampler, tf, ray, t0, t1, params.s1, params, acc, phase).samples;
      } else {
        parts = static_cast<std::uint32_t>(traverse(scene.bvh(), metas, ray, traversal, [&](const PartitionInterval &iv) {
          const double step = options.mode == RenderMode::SkipAdaptive
                                  ? compute_step_size(params, metas[iv.partition_id].normalized_variance)
                                  : params.s1;
          const MarchResult r = march_partition(sampler, tf, ray, iv.t_enter, iv.t_exit, step, params, acc, phase);
          samples += r.samples;
          partition_samples[iv.partition_id].fetch_add(r.samples, std::memory_order_relaxed);
          return !r.terminated;
        }));
      }
      const std::size_t idx = std::size_t(y) * W + x;
      fb.rgba[idx]          = detail::composite_background(acc, options.background);
      fb.samples[idx]       = static_cast<std::uint32_t>(samples);
      visited[idx]          = parts;
    };

    constexpr int kTile   = 16;
    const int     tiles_x = (W + kTile - 1) / kTile;
    const int     tiles_y = (H + kTile - 1) / kTile;
    parallel_for(std::size_t(tiles_x) * tiles_y, options.threads, [&](std::size_t tile) {
      const int x0 = static_cast<int>(tile % tiles_x) * kTile;
      const int y0 = static_cast<int>(tile / tiles_x) * kTile;
      for (int y = y0; y < std::min(H, y0 + kTile); ++y)
        for (int x = x0; x < std::min(W, x0 + kTile); ++x) shade(x, y);
    });

    if (stats_out) {
      RenderStats &s = *stats_out;
      s              = RenderStats{};
      s.partitions   = static_cast<std::uint32_t>(P);
      for (std::uint32_t n : fb.samples) s.total_samples += n;
      for (std::uint32_t n : visited) s.partitions_visited += n;
      s.partition_samples.reserve(P);
      for (const auto &n : partition_samples) s.partition_samples.push_back(n.load());
      s.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    return fb;
  }

} // namespace tetvol
