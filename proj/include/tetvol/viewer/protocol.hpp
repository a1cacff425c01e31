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
#include "tetvol/scene_config.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

/// Wire protocol between the viewer service and its clients. Every transport message is
/// one envelope: a 1-byte tag, a 4-byte little-endian body length, then the body.
///
///   Control (client <-> server)  JSON object with a "type" field
///   Frame   (server -> client)   u32 LE header length | JSON header | RGBA8 pixels
///                                [| RGBA8 heatmap when header.heatmap is true]
///   Error   (server -> client)   JSON {"type":"Error","message":...}
namespace tetvol::viewer {

  enum class Tag : std::uint8_t { Control = 0x01, Frame = 0x02, Error = 0x03 };

  struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  struct Envelope {
    Tag                       tag;
    std::vector<std::uint8_t> body;
  };

  inline void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v)
  {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  inline std::uint32_t get_u32(std::span<const std::uint8_t> in)
  {
    return std::uint32_t(in[0]) | std::uint32_t(in[1]) << 8 | std::uint32_t(in[2]) << 16 | std::uint32_t(in[3]) << 24;
  }

  inline std::vector<std::uint8_t> encode_envelope(Tag tag, std::span<const std::uint8_t> body)
  {
    std::vector<std::uint8_t> out;
    out.reserve(5 + body.size());
    out.push_back(static_cast<std::uint8_t>(tag));
    put_u32(out, static_cast<std::uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    return out;
  }

  inline std::vector<std::uint8_t> encode_json(Tag tag, const nlohmann::json &j)
  {
    const std::string s = j.dump();
    return encode_envelope(tag, std::span(reinterpret_cast<const std::uint8_t *>(s.data()), s.size()));
  }

  inline Envelope decode_envelope(std::span<const std::uint8_t> bytes)
  {
    if (bytes.size() < 5) throw ProtocolError("envelope shorter than its 5-byte header");
    const auto tag = bytes[0];
    if (tag < 0x01 || tag > 0x03) throw ProtocolError("unknown envelope tag " + std::to_string(tag));
    const std::uint32_t len = get_u32(bytes.subspan(1, 4));
    if (bytes.size() - 5 != len) throw ProtocolError("envelope length field does not match body size");
    return {static_cast<Tag>(tag), std::vector<std::uint8_t>(bytes.begin() + 5, bytes.end())};
  }

  // ------------------------------------------------------------------
  // client -> server
  // ------------------------------------------------------------------

  struct Hello {
    bool deflate = false; ///< requested; the server answers with what it will use
  };
  struct SetCamera {
    Vec3   position, look_at, up{0, 1, 0};
    double fov = 45.0;
  };
  struct SetTransferFunction {
    TransferFunction tf;
  };
  struct SetParams {
    std::optional<double>     s1, s2, p, termination_opacity;
    std::optional<RenderMode> mode;
  };
  struct RequestFrame {
    int  width   = 0;
    int  height  = 0;
    bool heatmap = false;
    bool ssim    = false; ///< also render the reference and report SSIM against it
  };

  using ClientMessage = std::variant<Hello, SetCamera, SetTransferFunction, SetParams, RequestFrame>;

  inline ClientMessage parse_client_message(const nlohmann::json &j)
  {
    try {
      if (!j.is_object()) throw ProtocolError("control message must be a JSON object");
      const std::string type = j.at("type").get<std::string>();
      if (type == "Hello") return Hello{j.value("deflate", false)};
      if (type == "SetCamera") {
        SetCamera m;
        m.position = detail::vec3_from_json(j.at("position"));
        m.look_at  = detail::vec3_from_json(j.at("look_at"));
        if (j.contains("up")) m.up = detail::vec3_from_json(j["up"]);
        m.fov = j.value("fov", m.fov);
        return m;
      }
      if (type == "SetTransferFunction") return SetTransferFunction{transfer_function_from_json(j)};
      if (type == "SetParams") {
        SetParams m;
        auto opt = [&](const char *key, std::optional<double> &field) {
          if (j.contains(key)) field = j[key].get<double>();
        };
        opt("s1", m.s1);
        opt("s2", m.s2);
        opt("p", m.p);
        opt("termination_opacity", m.termination_opacity);
        if (j.contains("mode")) m.mode = parse_mode(j["mode"].get<std::string>());
        return m;
      }
      if (type == "RequestFrame") {
        RequestFrame m;
        m.width   = j.at("width").get<int>();
        m.height  = j.at("height").get<int>();
        m.heatmap = j.value("heatmap", false);
        m.ssim    = j.value("ssim", false);
        if (m.width < 1 || m.height < 1) throw ProtocolError("frame size must be at least 1x1");
        return m;
      }
      throw ProtocolError("unknown message type '" + type + "'");
    } catch (const nlohmann::json::exception &e) {
      throw ProtocolError(std::string("malformed message: ") + e.what());
    } catch (const TransferFunctionError &e) {
      throw ProtocolError(e.what());
    } catch (const ConfigError &e) {
      throw ProtocolError(e.what());
    } catch (const std::invalid_argument &e) {
      throw ProtocolError(e.what());
    }
  }

  inline ClientMessage decode_client_message(std::span<const std::uint8_t> bytes)
  {
    const Envelope env = decode_envelope(bytes);
    if (env.tag != Tag::Control) throw ProtocolError("clients may only send control messages");
    const auto j = nlohmann::json::parse(env.body.begin(), env.body.end(), nullptr, false);
    if (j.is_discarded()) throw ProtocolError("control body is not valid JSON");
    return parse_client_message(j);
  }

  inline nlohmann::json to_json(const ClientMessage &msg)
  {
    return std::visit(
        [](const auto &m) -> nlohmann::json {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Hello>) {
            return {{"type", "Hello"}, {"deflate", m.deflate}};
          } else if constexpr (std::is_same_v<T, SetCamera>) {
            return {{"type", "SetCamera"},
                    {"position", {m.position.x, m.position.y, m.position.z}},
                    {"look_at", {m.look_at.x, m.look_at.y, m.look_at.z}},
                    {"up", {m.up.x, m.up.y, m.up.z}},
                    {"fov", m.fov}};
          } else if constexpr (std::is_same_v<T, SetTransferFunction>) {
            nlohmann::json j = tetvol::to_json(m.tf);
            j["type"]        = "SetTransferFunction";
            return j;
          } else if constexpr (std::is_same_v<T, SetParams>) {
            nlohmann::json j = {{"type", "SetParams"}};
            if (m.s1) j["s1"] = *m.s1;
            if (m.s2) j["s2"] = *m.s2;
            if (m.p) j["p"] = *m.p;
            if (m.termination_opacity) j["termination_opacity"] = *m.termination_opacity;
            if (m.mode) j["mode"] = std::string(to_string(*m.mode));
            return j;
          } else {
            return {{"type", "RequestFrame"}, {"width", m.width}, {"height", m.height}, {"heatmap", m.heatmap},
                    {"ssim", m.ssim}};
          }
        },
        msg);
  }

  inline std::vector<std::uint8_t> encode_client_message(const ClientMessage &msg)
  {
    return encode_json(Tag::Control, to_json(msg));
  }

  // ------------------------------------------------------------------
  // server -> client
  // ------------------------------------------------------------------

  struct FrameStats {
    double                ms            = 0.0;
    std::uint64_t         total_samples = 0;
    std::optional<double> ssim_vs_reference;
  };

  struct FrameMessage {
    std::uint64_t                            frame_id = 0;
    int                                      width    = 0;
    int                                      height   = 0;
    std::vector<std::uint8_t>                rgba; ///< 4 * width * height, row-major
    FrameStats                               stats;
    std::optional<std::vector<std::uint8_t>> heatmap_rgba;
  };

  inline std::vector<std::uint8_t> encode_frame(const FrameMessage &f)
  {
    nlohmann::json header = {{"frame_id", f.frame_id},
                             {"width", f.width},
                             {"height", f.height},
                             {"heatmap", f.heatmap_rgba.has_value()},
                             {"stats", {{"ms", f.stats.ms}, {"total_samples", f.stats.total_samples}}}};
    if (f.stats.ssim_vs_reference) header["stats"]["ssim_vs_reference"] = *f.stats.ssim_vs_reference;
    const std::string h = header.dump();

    std::vector<std::uint8_t> body;
    body.reserve(4 + h.size() + f.rgba.size() + (f.heatmap_rgba ? f.heatmap_rgba->size() : 0));
    put_u32(body, static_cast<std::uint32_t>(h.size()));
    body.insert(body.end(), h.begin(), h.end());
    body.insert(body.end(), f.rgba.begin(), f.rgba.end());
    if (f.heatmap_rgba) body.insert(body.end(), f.heatmap_rgba->begin(), f.heatmap_rgba->end());
    return encode_envelope(Tag::Frame, body);
  }

  inline FrameMessage decode_frame(std::span<const std::uint8_t> bytes)
  {
    const Envelope env = decode_envelope(bytes);
    if (env.tag != Tag::Frame) throw ProtocolError("not a frame envelope");
    std::span<const std::uint8_t> body(env.body);
    if (body.size() < 4) throw ProtocolError("frame body too short");
    const std::uint32_t hlen = get_u32(body);
    if (body.size() < 4 + std::size_t(hlen)) throw ProtocolError("frame header truncated");
    const auto header = nlohmann::json::parse(body.begin() + 4, body.begin() + 4 + hlen, nullptr, false);
    if (!header.is_object()) throw ProtocolError("frame header is not a JSON object");

    FrameMessage f;
    try {
      f.frame_id              = header.at("frame_id").get<std::uint64_t>();
      f.width                 = header.at("width").get<int>();
      f.height                = header.at("height").get<int>();
      f.stats.ms              = header.at("stats").at("ms").get<double>();
      f.stats.total_samples   = header.at("stats").at("total_samples").get<std::uint64_t>();
      if (header["stats"].contains("ssim_vs_reference"))
        f.stats.ssim_vs_reference = header["stats"]["ssim_vs_reference"].get<double>();
    } catch (const nlohmann::json::exception &e) {
      throw ProtocolError(std::string("malformed frame header: ") + e.what());
    }
    if (f.width < 1 || f.height < 1) throw ProtocolError("frame size must be at least 1x1");
    const std::size_t n    = std::size_t(4) * f.width * f.height;
    const bool        heat = header.value("heatmap", false);
    if (body.size() != 4 + hlen + n * (heat ? 2 : 1)) throw ProtocolError("frame payload length mismatch");
    auto px = body.subspan(4 + hlen);
    f.rgba.assign(px.begin(), px.begin() + n);
    if (heat) f.heatmap_rgba.emplace(px.begin() + n, px.end());
    return f;
  }

  inline std::vector<std::uint8_t> encode_error(const std::string &message)
  {
    return encode_json(Tag::Error, {{"type", "Error"}, {"message", message}});
  }

} // namespace tetvol::viewer
