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

#include "tetvol/render.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <variant>

namespace tetvol {

  struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  struct SyntheticMeshSpec {
    int           n         = 8;
    AnalyticField field     = AnalyticField::Radial;
    Centering     centering = Centering::Vertex;
  };

  /// A reproducible experiment: where the mesh and TF come from plus every render setting.
  /// Relative paths resolve against the config file's directory.
  struct SceneConfig {
    std::variant<std::filesystem::path, SyntheticMeshSpec> mesh;
    TransferFunction                                       tf;
    Camera                                                 camera;
    AdaptiveParams                                         params;
    RenderMode                                             mode = RenderMode::SkipAdaptive;
    std::optional<KdBuildConfig>                           kd;
    std::optional<double>                                  epsilon;
    Rgba                                                   background{0, 0, 0, 1};

    TetMesh load_mesh() const
    {
      if (const auto *path = std::get_if<std::filesystem::path>(&mesh)) return tetvol::load_mesh(*path);
      const auto &s = std::get<SyntheticMeshSpec>(mesh);
      return generate_synthetic(s.n, s.field, s.centering);
    }

    Scene build_scene(unsigned threads = 0) const
    {
      TetMesh             m  = load_mesh();
      const KdBuildConfig kc = kd.value_or(KdBuildConfig::defaults_for(m.num_tets()));
      return Scene(std::move(m), kc, tf, epsilon, threads);
    }

    RenderOptions render_options(unsigned threads = 0) const { return {mode, params, background, threads}; }
  };

  namespace detail {
    inline Vec3 vec3_from_json(const nlohmann::json &j)
    {
      if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-component array");
      return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
    }

    inline Centering parse_centering(const std::string &s)
    {
      if (s == "vertex") return Centering::Vertex;
      if (s == "cell") return Centering::Cell;
      throw ConfigError("unknown centering '" + s + "'");
    }
  } // namespace detail

  inline Camera camera_from_json(const nlohmann::json &j, Camera cam = {})
  {
    if (j.contains("position")) cam.position = detail::vec3_from_json(j["position"]);
    if (j.contains("look_at")) cam.look_at = detail::vec3_from_json(j["look_at"]);
    if (j.contains("up")) cam.up = detail::vec3_from_json(j["up"]);
    cam.fov_deg = j.value("fov", cam.fov_deg);
    cam.width   = j.value("width", cam.width);
    cam.height  = j.value("height", cam.height);
    return cam;
  }

  inline AdaptiveParams params_from_json(const nlohmann::json &j, AdaptiveParams p = {})
  {
    p.s1                  = j.value("s1", p.s1);
    p.s2                  = j.value("s2", p.s2);
    p.p                   = j.value("p", p.p);
    p.termination_opacity = j.value("termination_opacity", p.termination_opacity);
    p.jitter              = j.value("jitter", p.jitter);
    return p;
  }

  inline SceneConfig scene_config_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {})
  {
    try {
      SceneConfig c;
      const auto &mesh = j.at("mesh");
      if (mesh.is_string()) {
        c.mesh = base_dir / mesh.get<std::string>();
      } else {
        const auto       &s = mesh.at("synthetic");
        SyntheticMeshSpec spec;
        spec.n         = s.value("n", spec.n);
        spec.field     = parse_field(s.value("field", std::string("radial")));
        spec.centering = detail::parse_centering(s.value("centering", std::string("vertex")));
        c.mesh         = spec;
      }
      const auto &tf = j.at("transfer_function");
      c.tf = tf.is_string() ? load_transfer_function(base_dir / tf.get<std::string>()) : transfer_function_from_json(tf);
      if (j.contains("camera")) c.camera = camera_from_json(j["camera"]);
      if (j.contains("params")) c.params = params_from_json(j["params"]);
      if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
      if (j.contains("kd")) {
        KdBuildConfig kd;
        kd.max_leaf_elements = j["kd"].value("max_leaf_elements", kd.max_leaf_elements);
        kd.max_depth         = j["kd"].value("max_depth", kd.max_depth);
        c.kd                 = kd;
      }
      if (j.contains("epsilon") && !j["epsilon"].is_null()) c.epsilon = j["epsilon"].get<double>();
      if (j.contains("background")) {
        const auto &b = j["background"];
        if (!b.is_array() || b.size() != 4) throw ConfigError("background must be [r,g,b,a]");
        c.background = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
      }
      return c;
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(std::string("malformed scene config: ") + e.what());
    } catch (const std::invalid_argument &e) {
      throw ConfigError(e.what());
    } catch (const MeshError &e) {
      throw ConfigError(e.what());
    } catch (const TransferFunctionError &e) {
      throw ConfigError(e.what());
    }
  }

  inline SceneConfig load_scene_config(const std::filesystem::path &path)
  {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scene config " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception &e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
    return scene_config_from_json(j, path.parent_path());
  }

} // namespace tetvol
