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

#include "tetvol/mesh.hpp"

#include <numeric>
#include <optional>

namespace tetvol {

  /// Barycentric coordinates are accepted when every component is >= -this.
  inline constexpr double kBarycentricTolerance = 1e-9;

  struct PointLocation {
    std::uint32_t         tet;
    std::array<double, 4> bary;
  };

  /// Point-location structure over a tet mesh: a BVH over element bounding boxes with
  /// precomputed inverse barycentric maps. Holds its own compact copy of what it needs,
  /// so it stays valid if the source mesh is moved or destroyed. Immutable after
  /// construction; queries are thread-safe.
  class MeshSampler {
  public:
    static constexpr std::uint32_t kMaxLeafSize = 8;

    MeshSampler() = default;

    explicit MeshSampler(const TetMesh &mesh) : centering_(mesh.centering), bounds_(mesh.bounds)
    {
      const std::size_t T = mesh.num_tets();
      elems_.resize(T);
      for (std::size_t t = 0; t < T; ++t) elems_[t] = make_element(mesh, t);
      if (T == 0) return;

      std::vector<std::uint32_t> order(T);
      std::iota(order.begin(), order.end(), 0u);
      std::vector<AABB> boxes(T);
      std::vector<Vec3> centroids(T);
      for (std::size_t t = 0; t < T; ++t) {
        boxes[t]     = mesh.tet_bounds(t);
        centroids[t] = boxes[t].center();
      }
      nodes_.reserve(2 * T / kMaxLeafSize + 1);
      nodes_.push_back({});
      build(0, order, 0, static_cast<std::uint32_t>(T), boxes, centroids);

      // reorder element data into leaf order for locality
      std::vector<Element> sorted(T);
      for (std::size_t i = 0; i < T; ++i) sorted[i] = elems_[order[i]];
      elems_ = std::move(sorted);
    }

    bool built() const { return !nodes_.empty(); }
    std::size_t num_elements() const { return elems_.size(); }
    Centering centering() const { return centering_; }
    const AABB &bounds() const { return bounds_; }

    /// Finds the containing tet with the lowest index, or nothing if the point is outside.
    std::optional<PointLocation> locate(const Vec3 &p) const
    {
      std::array<double, 4> bary{};
      const Element *e = find(p, bary);
      if (!e) return std::nullopt;
      return PointLocation{e->tet, bary};
    }

    /// Scalar field at p: barycentric interpolation (vertex data) or the cell value.
    std::optional<double> sample(const Vec3 &p) const
    {
      std::array<double, 4> b{};
      const Element *e = find(p, b);
      if (!e) return std::nullopt;
      if (centering_ == Centering::Cell) return e->values[0];
      return b[0] * e->values[0] + b[1] * e->values[1] + b[2] * e->values[2] + b[3] * e->values[3];
    }

    /// Every tet id stored in the leaves, in leaf order. Used by structural tests.
    std::vector<std::uint32_t> leaf_elements() const
    {
      std::vector<std::uint32_t> ids;
      ids.reserve(elems_.size());
      for (const Element &e : elems_) ids.push_back(e.tet);
      return ids;
    }

  private:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    struct Element {
      Vec3                  v0;
      std::array<double, 9> inv; // row-major inverse of [v1-v0 | v2-v0 | v3-v0]
      std::array<double, 4> values;
      std::uint32_t         tet;
    };

    struct Node {
      AABB          box;
      std::uint32_t first   = 0; // leaf: first element; inner: left child (right = first+1)
      std::uint32_t count   = 0; // > 0 for leaves
      std::uint32_t min_tet = 0; // smallest tet id in the subtree
    };

    const Element *find(const Vec3 &p, std::array<double, 4> &bary) const
    {
      if (nodes_.empty() || !nodes_[0].box.contains(p)) return nullptr;
      const Element *best = nullptr;
      std::uint32_t  best_tet = kNone;

      std::uint32_t stack[64];
      int           sp = 0;
      stack[sp++]    = 0;
      while (sp > 0) {
        const Node &node = nodes_[stack[--sp]];
        if (node.min_tet >= best_tet || !node.box.contains(p)) continue;
        if (node.count > 0) {
          for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
            const Element &e = elems_[i];
            if (e.tet >= best_tet) continue;
            std::array<double, 4> b{};
            if (barycentric(e, p, b)) {
              best     = &e;
              best_tet = e.tet;
              bary     = b;
            }
          }
        } else {
          stack[sp++] = node.first;
          stack[sp++] = node.first + 1;
        }
      }
      return best;
    }

    static Element make_element(const TetMesh &mesh, std::size_t t)
    {
      const auto c  = mesh.corners(t);
      const Vec3 e1 = c[1] - c[0], e2 = c[2] - c[0], e3 = c[3] - c[0];
      // inverse of the matrix with columns e1,e2,e3: rows are the cross products / det
      const Vec3   r0  = cross(e2, e3);
      const Vec3   r1  = cross(e3, e1);
      const Vec3   r2  = cross(e1, e2);
      const double det = dot(e1, r0);
      const double inv_det = 1.0 / det;
      Element el;
      el.v0  = c[0];
      el.inv = {r0.x * inv_det, r0.y * inv_det, r0.z * inv_det,
                r1.x * inv_det, r1.y * inv_det, r1.z * inv_det,
                r2.x * inv_det, r2.y * inv_det, r2.z * inv_det};
      el.tet = static_cast<std::uint32_t>(t);
      if (mesh.centering == Centering::Cell) {
        el.values = {mesh.field[t], 0, 0, 0};
      } else {
        const Tet &tet = mesh.tets[t];
        el.values = {mesh.field[tet[0]], mesh.field[tet[1]], mesh.field[tet[2]], mesh.field[tet[3]]};
      }
      return el;
    }

    static bool barycentric(const Element &e, const Vec3 &p, std::array<double, 4> &b)
    {
      const Vec3   d  = p - e.v0;
      const double b1 = e.inv[0] * d.x + e.inv[1] * d.y + e.inv[2] * d.z;
      if (b1 < -kBarycentricTolerance) return false;
      const double b2 = e.inv[3] * d.x + e.inv[4] * d.y + e.inv[5] * d.z;
      if (b2 < -kBarycentricTolerance) return false;
      const double b3 = e.inv[6] * d.x + e.inv[7] * d.y + e.inv[8] * d.z;
      if (b3 < -kBarycentricTolerance) return false;
      const double b0 = 1.0 - b1 - b2 - b3;
      if (b0 < -kBarycentricTolerance) return false;
      b = {b0, b1, b2, b3};
      return true;
    }

    void build(std::uint32_t node_index, std::vector<std::uint32_t> &order, std::uint32_t begin,
               std::uint32_t end, const std::vector<AABB> &boxes, const std::vector<Vec3> &centroids)
    {
      AABB box, centroid_box;
      std::uint32_t min_tet = kNone;
      for (std::uint32_t i = begin; i < end; ++i) {
        box.extend(boxes[order[i]]);
        centroid_box.extend(centroids[order[i]]);
        min_tet = std::min(min_tet, order[i]);
      }
      nodes_[node_index].box     = box;
      nodes_[node_index].min_tet = min_tet;

      const std::uint32_t n = end - begin;
      const int axis = centroid_box.longest_axis();
      if (n <= kMaxLeafSize || centroid_box.size()[axis] == 0.0) {
        nodes_[node_index].first = begin;
        nodes_[node_index].count = n;
        return;
      }
      const std::uint32_t mid = begin + n / 2;
      std::nth_element(order.begin() + begin, order.begin() + mid, order.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = centroids[a][axis], cb = centroids[b][axis];
                         return ca < cb || (ca == cb && a < b);
                       });
      const auto left = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back({});
      nodes_.push_back({});
      nodes_[node_index].first = left;
      nodes_[node_index].count = 0;
      build(left, order, begin, mid, boxes, centroids);
      build(left + 1, order, mid, end, boxes, centroids);
    }

    Centering            centering_ = Centering::Vertex;
    AABB                 bounds_;
    std::vector<Element> elems_;
    std::vector<Node>    nodes_;
  };

} // namespace tetvol
