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

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

namespace tetvol {

  enum class SplitRule { MedianOfCentroids };

  struct KdBuildConfig {
    std::size_t max_leaf_elements = 64;
    std::size_t max_depth         = 24;
    SplitRule   split_rule        = SplitRule::MedianOfCentroids;

    /// Coarse partitioning that scales with mesh size: max(64, T/4096) elements per leaf.
    static KdBuildConfig defaults_for(std::size_t tet_count)
    {
      KdBuildConfig c;
      c.max_leaf_elements = std::max<std::size_t>(64, tet_count / 4096);
      return c;
    }

    void validate() const
    {
      if (max_leaf_elements < 1) throw std::invalid_argument("max_leaf_elements must be >= 1");
      if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    }
  };

  /// A convex region of space (a KD leaf shrunk to its contents) and the elements that
  /// overlap it. Elements straddling a split plane are listed in every leaf they touch.
  struct Partition {
    std::uint32_t              id = 0;
    AABB                       bounds;      ///< refined bounds used for traversal
    AABB                       leaf_bounds; ///< original KD leaf
    std::vector<std::uint32_t> element_ids; ///< ascending
    ValueRange                 value_range; ///< over whole elements, even partly contained ones
  };

  /// Shrinks a partition to the union of its elements' boxes, clipped to the KD leaf so
  /// that partitions stay disjoint.
  inline Partition refine_partition_bounds(Partition partition, const TetMesh &mesh, const AABB &leaf_bounds)
  {
    AABB fit;
    for (std::uint32_t t : partition.element_ids) fit.extend(mesh.tet_bounds(t));
    partition.leaf_bounds = leaf_bounds;
    partition.bounds      = intersection(fit, leaf_bounds);
    return partition;
  }

  namespace detail {

    struct KdBuilder {
      const TetMesh         &mesh;
      const KdBuildConfig   &config;
      std::vector<AABB>      boxes;
      std::vector<Partition> leaves;

      void make_leaf(std::vector<std::uint32_t> elements, const AABB &bounds)
      {
        Partition p;
        p.id          = static_cast<std::uint32_t>(leaves.size());
        p.element_ids = std::move(elements);
        for (std::uint32_t t : p.element_ids) p.value_range.extend(mesh.tet_value_range(t));
        leaves.push_back(refine_partition_bounds(std::move(p), mesh, bounds));
      }

      void build(std::vector<std::uint32_t> elements, const AABB &bounds, std::size_t depth)
      {
        const std::size_t n = elements.size();
        if (n == 0) return;
        if (n <= config.max_leaf_elements || depth >= config.max_depth) {
          make_leaf(std::move(elements), bounds);
          return;
        }
        const int axis = bounds.longest_axis();

        std::vector<std::pair<double, std::uint32_t>> keys;
        keys.reserve(n);
        for (std::uint32_t t : elements) keys.emplace_back(boxes[t].center()[axis], t);
        // ties resolve by tet id through the pair ordering
        const std::size_t mid = n / 2;
        std::nth_element(keys.begin(), keys.begin() + mid, keys.end());
        double split = keys[mid].first;
        if (n % 2 == 0) {
          const double below = std::max_element(keys.begin(), keys.begin() + mid)->first;
          split              = 0.5 * (below + split);
        }

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t t : elements) {
          if (boxes[t].lo[axis] < split) left.push_back(t);
          if (boxes[t].hi[axis] > split) right.push_back(t);
        }
        if (left.size() == n && right.size() == n) {
          make_leaf(std::move(elements), bounds);
          return;
        }
        AABB left_bounds = bounds, right_bounds = bounds;
        left_bounds.hi[axis]  = split;
        right_bounds.lo[axis] = split;
        elements.clear();
        elements.shrink_to_fit();
        build(std::move(left), left_bounds, depth + 1);
        build(std::move(right), right_bounds, depth + 1);
      }
    };

  } // namespace detail

  /// Partitions mesh elements by the leaves of a median-split KD-tree. Each node splits
  /// its longest axis at the median element centroid; leaves are numbered depth-first,
  /// left before right, and come back with refined bounds.
  inline std::vector<Partition> build_partitions(const TetMesh &mesh, const KdBuildConfig &config)
  {
    config.validate();
    if (mesh.tets.empty()) throw MeshError("cannot partition an empty mesh");
    detail::KdBuilder builder{mesh, config, {}, {}};
    builder.boxes.reserve(mesh.num_tets());
    for (std::size_t t = 0; t < mesh.num_tets(); ++t) builder.boxes.push_back(mesh.tet_bounds(t));
    std::vector<std::uint32_t> all(mesh.num_tets());
    for (std::size_t t = 0; t < all.size(); ++t) all[t] = static_cast<std::uint32_t>(t);
    builder.build(std::move(all), mesh.bounds, 0);
    return std::move(builder.leaves);
  }

  /// Plain-text dump, one partition per line.
  inline void write_partition_dump(std::ostream &out, const std::vector<Partition> &partitions)
  {
    out << "# id lo.x lo.y lo.z hi.x hi.y hi.z elements value_min value_max\n";
    for (const Partition &p : partitions)
      out << p.id << ' ' << p.bounds.lo.x << ' ' << p.bounds.lo.y << ' ' << p.bounds.lo.z << ' ' << p.bounds.hi.x
          << ' ' << p.bounds.hi.y << ' ' << p.bounds.hi.z << ' ' << p.element_ids.size() << ' '
          << p.value_range.min << ' ' << p.value_range.max << '\n';
  }

} // namespace tetvol
