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

#include "tetvol/metrics.hpp"
#include "tetvol/viewer/protocol.hpp"

namespace tetvol::viewer {

  /// Result of applying one client message to the session state.
  struct Outcome {
    bool                          changed         = false; ///< state changed, a new frame is due
    bool                          frame_requested = false;
    std::optional<std::string>    error;                   ///< rejected; state unchanged
    std::optional<nlohmann::json> reply;                   ///< control reply for the sender
  };

  /// Transport-independent viewer state: the scene plus the current camera, parameters,
  /// and frame settings. Only the transfer function and its metadata ever change inside
  /// the scene; geometry and the partition BVH stay fixed.
  class ViewerSession {
  public:
    ViewerSession(Scene scene, Camera camera, RenderOptions options)
        : scene_(std::move(scene)), camera_(camera), options_(options)
    {
      camera_.validate();
      options_.params.validate();
    }

    Outcome apply(const ClientMessage &msg)
    {
      Outcome out;
      std::visit([&](const auto &m) { apply_one(m, out); }, msg);
      return out;
    }

    /// Renders the current state. Throws RenderError on failure.
    FrameMessage render_frame()
    {
      RenderStats       stats;
      const Framebuffer fb = render(scene_, camera_, options_, &stats);
      FrameMessage      f;
      f.frame_id            = ++last_frame_id_;
      f.width               = fb.width;
      f.height              = fb.height;
      f.rgba                = to_rgba8(fb);
      f.stats.ms            = stats.ms;
      f.stats.total_samples = stats.total_samples;
      if (heatmap_) {
        const Image8 heat = heatmap_image(fb.samples, fb.width, fb.height);
        std::vector<std::uint8_t> rgba;
        rgba.reserve(std::size_t(4) * fb.width * fb.height);
        for (std::size_t i = 0; i < heat.rgb.size(); i += 3) {
          rgba.insert(rgba.end(), heat.rgb.begin() + i, heat.rgb.begin() + i + 3);
          rgba.push_back(255);
        }
        f.heatmap_rgba = std::move(rgba);
      }
      if (ssim_ && fb.width >= 11 && fb.height >= 11) {
        RenderOptions ref = options_;
        ref.mode          = RenderMode::Reference;
        f.stats.ssim_vs_reference = ssim(to_image(render(scene_, camera_, ref)), to_image(fb));
      }
      return f;
    }

    const Scene         &scene() const { return scene_; }
    const Camera        &camera() const { return camera_; }
    const RenderOptions &options() const { return options_; }
    std::uint64_t        last_frame_id() const { return last_frame_id_; }

  private:
    void apply_one(const Hello &, Outcome &out) { out.reply = nlohmann::json{{"type", "Hello"}, {"deflate", false}}; }

    void apply_one(const SetCamera &m, Outcome &out)
    {
      Camera cam   = camera_;
      cam.position = m.position;
      cam.look_at  = m.look_at;
      cam.up       = m.up;
      cam.fov_deg  = m.fov;
      try {
        cam.validate();
      } catch (const std::invalid_argument &e) {
        out.error = e.what();
        return;
      }
      camera_     = cam;
      out.changed = true;
    }

    void apply_one(const SetTransferFunction &m, Outcome &out)
    {
      scene_.set_transfer_function(m.tf, options_.threads);
      out.changed = true;
    }

    void apply_one(const SetParams &m, Outcome &out)
    {
      RenderOptions next = options_;
      if (m.s1) next.params.s1 = *m.s1;
      if (m.s2) next.params.s2 = *m.s2;
      if (m.p) next.params.p = *m.p;
      if (m.termination_opacity) next.params.termination_opacity = *m.termination_opacity;
      if (m.mode) next.mode = *m.mode;
      try {
        next.params.validate();
      } catch (const std::invalid_argument &e) {
        out.error = e.what();
        return;
      }
      options_    = next;
      out.changed = true;
    }

    void apply_one(const RequestFrame &m, Outcome &out)
    {
      camera_.width       = m.width;
      camera_.height      = m.height;
      heatmap_            = m.heatmap;
      ssim_               = m.ssim;
      out.frame_requested = true;
    }

    Scene         scene_;
    Camera        camera_;
    RenderOptions options_;
    bool          heatmap_       = false;
    bool          ssim_          = false;
    std::uint64_t last_frame_id_ = 0;
  };

} // namespace tetvol::viewer
