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

#include "tetvol/colormap.hpp"
#include "tetvol/render.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace tetvol {

  struct ImageError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  /// 8-bit RGB image, row-major, top row first.
  struct Image8 {
    int                       width  = 0;
    int                       height = 0;
    std::vector<std::uint8_t> rgb;

    friend bool operator==(const Image8 &, const Image8 &) = default;
  };

  /// [0,1] -> [0,255], rounding half up.
  inline std::uint8_t quantize(double c)
  {
    const double v = std::floor(std::clamp(c, 0.0, 1.0) * 255.0 + 0.5);
    return static_cast<std::uint8_t>(v);
  }

  inline Image8 to_image(const Framebuffer &fb)
  {
    Image8 img{fb.width, fb.height, {}};
    img.rgb.reserve(fb.rgba.size() * 3);
    for (const Rgba &c : fb.rgba) {
      img.rgb.push_back(quantize(c.r));
      img.rgb.push_back(quantize(c.g));
      img.rgb.push_back(quantize(c.b));
    }
    return img;
  }

  inline std::vector<std::uint8_t> to_rgba8(const Framebuffer &fb)
  {
    std::vector<std::uint8_t> out;
    out.reserve(fb.rgba.size() * 4);
    for (const Rgba &c : fb.rgba)
      for (double v : {c.r, c.g, c.b, c.a}) out.push_back(quantize(v));
    return out;
  }

  /// Per-pixel sample counts through the viridis table, scaled so the busiest pixel maps
  /// to index 255 (or by `max_samples` when given, for comparable images).
  inline Image8 heatmap_image(const std::vector<std::uint32_t> &samples, int width, int height,
                              std::uint32_t max_samples = 0)
  {
    if (max_samples == 0)
      for (std::uint32_t n : samples) max_samples = std::max(max_samples, n);
    Image8 img{width, height, {}};
    img.rgb.reserve(samples.size() * 3);
    for (std::uint32_t n : samples) {
      const std::size_t idx =
          max_samples ? std::min<std::size_t>(255, (std::uint64_t(std::min(n, max_samples)) * 255 + max_samples / 2) / max_samples)
                      : 0;
      for (std::uint8_t c : kViridis[idx]) img.rgb.push_back(c);
    }
    return img;
  }

  inline void write_ppm(std::ostream &out, const Image8 &img)
  {
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char *>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  }

  inline void write_ppm(const std::filesystem::path &path, const Image8 &img)
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError("cannot write " + path.string());
    write_ppm(out, img);
    if (!out) throw ImageError("write failed for " + path.string());
  }

  inline Image8 read_ppm(std::istream &in)
  {
    std::string magic;
    int         maxval = 0;
    Image8      img;
    in >> magic >> img.width >> img.height >> maxval;
    if (!in || magic != "P6" || maxval != 255 || img.width < 1 || img.height < 1)
      throw ImageError("not an 8-bit binary PPM");
    in.get();
    img.rgb.resize(std::size_t(img.width) * img.height * 3);
    in.read(reinterpret_cast<char *>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
    if (!in) throw ImageError("truncated PPM");
    return img;
  }

  inline Image8 read_ppm(const std::filesystem::path &path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError("cannot open " + path.string());
    return read_ppm(in);
  }

} // namespace tetvol
