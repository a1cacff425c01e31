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

#include "tetvol/math.hpp"

#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tetvol {

  enum class Centering : std::uint8_t { Vertex = 0, Cell = 1 };

  struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  using Tet = std::array<std::uint32_t, 4>;

  /// Linear tetrahedral mesh with a single scalar field. Positions and field values are
  /// stored at double precision but the on-disk format is single precision, so meshes
  /// meant to round-trip should hold f32-representable values (the generator does).
  struct TetMesh {
    std::vector<Vec3>   vertices;
    std::vector<Tet>    tets;
    std::vector<double> field;
    Centering           centering = Centering::Vertex;
    AABB                bounds;

    std::size_t num_tets() const { return tets.size(); }

    std::array<Vec3, 4> corners(std::size_t t) const
    {
      const Tet &tet = tets[t];
      return {vertices[tet[0]], vertices[tet[1]], vertices[tet[2]], vertices[tet[3]]};
    }

    AABB tet_bounds(std::size_t t) const
    {
      AABB b;
      for (const Vec3 &p : corners(t)) b.extend(p);
      return b;
    }

    Vec3 tet_centroid(std::size_t t) const
    {
      const auto c = corners(t);
      return (c[0] + c[1] + c[2] + c[3]) * 0.25;
    }

    /// Signed volume; positive for right-handed vertex order.
    double tet_signed_volume(std::size_t t) const
    {
      const auto c = corners(t);
      return dot(c[1] - c[0], cross(c[2] - c[0], c[3] - c[0])) / 6.0;
    }

    /// Process-wide count of tet_value_range() calls, so tests can check which code paths
    /// read per-element field data.
    static std::atomic<std::uint64_t> &element_range_reads()
    {
      static std::atomic<std::uint64_t> count{0};
      return count;
    }

    /// Field range of a single element: the four vertex values, or the cell value.
    ValueRange tet_value_range(std::size_t t) const
    {
      element_range_reads().fetch_add(1, std::memory_order_relaxed);
      if (centering == Centering::Cell) return {field[t], field[t]};
      ValueRange r;
      for (std::uint32_t v : tets[t]) r.extend(field[v]);
      return r;
    }

    void compute_bounds()
    {
      bounds = AABB();
      for (const Vec3 &v : vertices) bounds.extend(v);
    }

    friend bool operator==(const TetMesh &, const TetMesh &) = default;
  };

  inline constexpr double kDegenerateVolumeFactor = 1e-12;

  /// Checks every structural invariant and recomputes the bounds. Throws MeshError.
  inline void validate(TetMesh &mesh)
  {
    const std::size_t V = mesh.vertices.size();
    const std::size_t T = mesh.tets.size();
    const std::size_t expected = mesh.centering == Centering::Vertex ? V : T;
    if (mesh.field.size() != expected) {
      std::ostringstream msg;
      msg << "field length " << mesh.field.size() << " does not match "
          << (mesh.centering == Centering::Vertex ? "vertex" : "tet") << " count " << expected;
      throw MeshError(msg.str());
    }
    for (std::size_t t = 0; t < T; ++t)
      for (std::uint32_t idx : mesh.tets[t])
        if (idx >= V) {
          std::ostringstream msg;
          msg << "tet " << t << " references vertex " << idx << " but only " << V << " vertices exist";
          throw MeshError(msg.str());
        }
    for (std::size_t v = 0; v < V; ++v)
      for (int a = 0; a < 3; ++a)
        if (!std::isfinite(mesh.vertices[v][a])) throw MeshError("vertex " + std::to_string(v) + " is not finite");
    for (std::size_t i = 0; i < mesh.field.size(); ++i)
      if (!std::isfinite(mesh.field[i])) throw MeshError("field value " + std::to_string(i) + " is not finite");
    mesh.compute_bounds();
    const double diag = mesh.bounds.diagonal();
    const double min_volume = kDegenerateVolumeFactor * diag * diag * diag;
    for (std::size_t t = 0; t < T; ++t) {
      const double vol = std::abs(mesh.tet_signed_volume(t));
      if (!(vol > min_volume)) {
        std::ostringstream msg;
        msg << "degenerate tet " << t << " (volume " << vol << ")";
        throw MeshError(msg.str());
      }
    }
  }

  // ------------------------------------------------------------------
  // TET1 binary format (little-endian):
  //   "TET1" | u8 centering | u64 V | u64 T | V*3 f32 | T*4 u32 | (V or T) f32
  // ------------------------------------------------------------------

  namespace detail {
    static_assert(std::endian::native == std::endian::little, "TET1 IO assumes a little-endian host");

    template <typename T>
    void write_pod(std::ostream &out, const T &v)
    {
      out.write(reinterpret_cast<const char *>(&v), sizeof(T));
    }

    template <typename T>
    T read_pod(std::istream &in, const char *what)
    {
      T v{};
      in.read(reinterpret_cast<char *>(&v), sizeof(T));
      if (!in) throw MeshError(std::string("truncated mesh file while reading ") + what);
      return v;
    }
  } // namespace detail

  inline void write_mesh(std::ostream &out, const TetMesh &mesh)
  {
    out.write("TET1", 4);
    detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(mesh.centering));
    detail::write_pod<std::uint64_t>(out, mesh.vertices.size());
    detail::write_pod<std::uint64_t>(out, mesh.tets.size());
    for (const Vec3 &v : mesh.vertices)
      for (int a = 0; a < 3; ++a) detail::write_pod<float>(out, static_cast<float>(v[a]));
    for (const Tet &t : mesh.tets)
      for (std::uint32_t i : t) detail::write_pod<std::uint32_t>(out, i);
    for (double f : mesh.field) detail::write_pod<float>(out, static_cast<float>(f));
  }

  inline TetMesh read_mesh(std::istream &in)
  {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "TET1", 4) != 0) throw MeshError("bad magic, expected TET1");
    const auto centering = detail::read_pod<std::uint8_t>(in, "centering");
    if (centering > 1) throw MeshError("unknown centering tag " + std::to_string(centering));
    const auto V = detail::read_pod<std::uint64_t>(in, "vertex count");
    const auto T = detail::read_pod<std::uint64_t>(in, "tet count");
    constexpr std::uint64_t kMaxCount = std::uint64_t(1) << 32;
    if (V > kMaxCount || T > kMaxCount) throw MeshError("implausible element counts in header");

    TetMesh mesh;
    mesh.centering = static_cast<Centering>(centering);
    mesh.vertices.resize(V);
    for (auto &v : mesh.vertices)
      for (int a = 0; a < 3; ++a) v[a] = detail::read_pod<float>(in, "positions");
    mesh.tets.resize(T);
    for (auto &t : mesh.tets)
      for (auto &i : t) i = detail::read_pod<std::uint32_t>(in, "indices");
    const std::uint64_t F = mesh.centering == Centering::Vertex ? V : T;
    mesh.field.resize(F);
    for (auto &f : mesh.field) f = detail::read_pod<float>(in, "field values");
    if (in.peek() != std::char_traits<char>::eof())
      throw MeshError("trailing bytes after field values (field length does not match centering)");
    validate(mesh);
    return mesh;
  }

  inline TetMesh load_mesh(const std::filesystem::path &path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError("cannot open mesh file " + path.string());
    return read_mesh(in);
  }

  inline void save_mesh(const std::filesystem::path &path, const TetMesh &mesh)
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MeshError("cannot write mesh file " + path.string());
    write_mesh(out, mesh);
    if (!out) throw MeshError("write failed for " + path.string());
  }

  // ------------------------------------------------------------------
  // synthetic meshes
  // ------------------------------------------------------------------

  enum class AnalyticField {
    Ramp,       ///< f = u.x
    Radial,     ///< f = |u - (0.5,0.5,0.5)|
    Sinusoidal, ///< f = sin(2pi u.x) sin(2pi u.y) sin(2pi u.z)
    Void,       ///< 0 for u.x < 0.5, else stepped levels 0.25..1 along u.y
  };

  inline constexpr std::string_view to_string(AnalyticField f)
  {
    switch (f) {
    case AnalyticField::Ramp: return "ramp";
    case AnalyticField::Radial: return "radial";
    case AnalyticField::Sinusoidal: return "sinusoidal";
    case AnalyticField::Void: return "void";
    }
    return "?";
  }

  inline AnalyticField parse_field(std::string_view name)
  {
    for (auto f : {AnalyticField::Ramp, AnalyticField::Radial, AnalyticField::Sinusoidal, AnalyticField::Void})
      if (name == to_string(f)) return f;
    throw MeshError("unknown field '" + std::string(name) + "'");
  }

  /// Evaluates an analytic field at normalized coordinates u in [0,1]^3.
  inline double evaluate_field(AnalyticField f, const Vec3 &u)
  {
    constexpr double two_pi = 6.283185307179586;
    switch (f) {
    case AnalyticField::Ramp: return u.x;
    case AnalyticField::Radial: return length(u - Vec3(0.5, 0.5, 0.5));
    case AnalyticField::Sinusoidal:
      return std::sin(two_pi * u.x) * std::sin(two_pi * u.y) * std::sin(two_pi * u.z);
    case AnalyticField::Void: {
      if (u.x < 0.5) return 0.0;
      const double level = std::min(3.0, std::floor(4.0 * u.y));
      return 0.25 * (1.0 + level);
    }
    }
    return 0.0;
  }

  /// N^3 unit cubes spanning [0,N]^3, each split into 5 tets. The split alternates with
  /// cube parity so that neighboring cubes share face diagonals. Field values are rounded
  /// to f32 so the mesh round-trips through TET1 exactly.
  inline TetMesh generate_synthetic(int n, AnalyticField field, Centering centering)
  {
    if (n < 1) throw MeshError("resolution must be >= 1");
    TetMesh mesh;
    mesh.centering = centering;
    const std::uint32_t nv = static_cast<std::uint32_t>(n) + 1;
    auto vid = [nv](std::uint32_t i, std::uint32_t j, std::uint32_t k) { return i + nv * (j + nv * k); };

    mesh.vertices.reserve(std::size_t(nv) * nv * nv);
    for (std::uint32_t k = 0; k < nv; ++k)
      for (std::uint32_t j = 0; j < nv; ++j)
        for (std::uint32_t i = 0; i < nv; ++i) mesh.vertices.emplace_back(i, j, k);

    // corner c of a cube has offset bits (c&1, c>>1&1, c>>2&1)
    static constexpr std::array<std::array<int, 4>, 5> even_split{{
        {1, 0, 3, 5}, {2, 0, 6, 3}, {4, 0, 5, 6}, {7, 3, 6, 5}, {0, 3, 5, 6}}};
    static constexpr std::array<std::array<int, 4>, 5> odd_split{{
        {0, 1, 4, 2}, {3, 1, 2, 7}, {5, 1, 7, 4}, {6, 2, 4, 7}, {1, 2, 7, 4}}};

    mesh.tets.reserve(std::size_t(n) * n * n * 5);
    for (std::uint32_t k = 0; k < std::uint32_t(n); ++k)
      for (std::uint32_t j = 0; j < std::uint32_t(n); ++j)
        for (std::uint32_t i = 0; i < std::uint32_t(n); ++i) {
          std::array<std::uint32_t, 8> c;
          for (std::uint32_t b = 0; b < 8; ++b) c[b] = vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
          const auto &split = ((i + j + k) & 1) ? odd_split : even_split;
          for (const auto &s : split) mesh.tets.push_back({c[s[0]], c[s[1]], c[s[2]], c[s[3]]});
        }

    const double inv_n = 1.0 / n;
    auto sample = [&](const Vec3 &p) {
      return static_cast<double>(static_cast<float>(evaluate_field(field, p * inv_n)));
    };
    if (centering == Centering::Vertex) {
      mesh.field.reserve(mesh.vertices.size());
      for (const Vec3 &v : mesh.vertices) mesh.field.push_back(sample(v));
    } else {
      mesh.field.reserve(mesh.tets.size());
      for (std::size_t t = 0; t < mesh.tets.size(); ++t) mesh.field.push_back(sample(mesh.tet_centroid(t)));
    }
    validate(mesh);
    return mesh;
  }

} // namespace tetvol
