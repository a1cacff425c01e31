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

#include "tetvol/partition.hpp"
#include "tetvol/transfer.hpp"

#include <atomic>
#include <numeric>
#include <optional>
#include <span>

namespace tetvol {

  struct Ray {
    Vec3   origin;
    Vec3   direction; ///< unit length
    double t_min = 0.0;
    double t_max = std::numeric_limits<double>::infinity();
  };

  struct PartitionInterval {
    std::uint32_t partition_id = 0;
    double        t_enter      = 0.0;
    double        t_exit       = 0.0;

    friend constexpr bool operator==(const PartitionInterval &, const PartitionInterval &) = default;
  };

  struct TraversalConfig {
    double epsilon = 1e-4;

    /// epsilon = 1e-4 x scene diagonal.
    static TraversalConfig for_bounds(const AABB &bounds)
    {
      const double d = bounds.diagonal();
      return {d > 0.0 ? 1e-4 * d : 1e-4};
    }
  };

  inline constexpr std::uint32_t kNoPartition = std::numeric_limits<std::uint32_t>::max();

  /// Clips the ray's line against a box and applies the traversal filters: the interval
  /// must end past t_min + epsilon and be at least epsilon long. Returns the clamped
  /// interval or nothing.
  inline std::optional<std::array<double, 2>> clipped_interval(const Ray &ray, const AABB &box, double epsilon)
  {
    auto [t0, t1] = slab_interval(ray.origin, ray.direction, box);
    t0 = std::max(t0, ray.t_min);
    t1 = std::min(t1, ray.t_max);
    if (!(t1 > ray.t_min + epsilon) || !(t1 - t0 >= epsilon)) return std::nullopt;
    return std::array<double, 2>{t0, t1};
  }

  /// Software BVH over partition boxes. Built once per partition geometry; transfer
  /// function changes never touch it.
  class PartitionBvh {
  public:
    static constexpr std::uint32_t kMaxLeafSize = 2;

    PartitionBvh() = default;

    explicit PartitionBvh(std::span<const Partition> partitions)
    {
      ++build_counter();
      boxes_.reserve(partitions.size());
      for (const Partition &p : partitions) boxes_.push_back(p.bounds);
      if (boxes_.empty()) return;
      items_.resize(boxes_.size());
      std::iota(items_.begin(), items_.end(), 0u);
      nodes_.push_back({});
      build(0, 0, static_cast<std::uint32_t>(items_.size()));
    }

    /// Process-wide number of BVH constructions; used to check that TF edits never rebuild.
    static std::atomic<std::uint64_t> &build_counter()
    {
      static std::atomic<std::uint64_t> count{0};
      return count;
    }

    std::size_t size() const { return boxes_.size(); }
    std::size_t num_nodes() const { return nodes_.size(); }
    const AABB &box(std::uint32_t id) const { return boxes_[id]; }

    /// Partition ids stored in the leaves, in leaf order.
    std::vector<std::uint32_t> leaf_items() const
    {
      std::vector<std::uint32_t> out;
      for (const Node &n : nodes_)
        if (n.count > 0) out.insert(out.end(), items_.begin() + n.first, items_.begin() + n.first + n.count);
      return out;
    }

    /// The active partition with the smallest clamped entry distance (ties: lower id),
    /// excluding `exclude_id`.
    template <typename IsActive>
    std::optional<PartitionInterval> closest(const Ray &ray, double epsilon, std::uint32_t exclude_id,
                                             IsActive &&is_active) const
    {
      if (nodes_.empty()) return std::nullopt;
      std::optional<PartitionInterval> best;
      double                           best_t = std::numeric_limits<double>::infinity();

      struct Entry {
        std::uint32_t node;
        double        t;
      };
      Entry stack[64];
      int   sp = 0;
      if (auto root = clipped_interval(ray, nodes_[0].box, epsilon)) stack[sp++] = {0, (*root)[0]};
      while (sp > 0) {
        const Entry e = stack[--sp];
        if (e.t > best_t) continue;
        const Node &node = nodes_[e.node];
        if (node.count > 0) {
          for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
            const std::uint32_t id = items_[i];
            if (id == exclude_id || !is_active(id)) continue;
            const auto iv = clipped_interval(ray, boxes_[id], epsilon);
            if (!iv) continue;
            const double t = (*iv)[0];
            if (t < best_t || (t == best_t && best && id < best->partition_id)) {
              best_t = t;
              best   = PartitionInterval{id, (*iv)[0], (*iv)[1]};
            }
          }
          continue;
        }
        const auto a  = clipped_interval(ray, nodes_[node.first].box, epsilon);
        const auto b  = clipped_interval(ray, nodes_[node.first + 1].box, epsilon);
        // push the farther child first so the nearer one is popped next
        if (a && b) {
          const bool a_first = (*a)[0] <= (*b)[0];
          const Entry near{a_first ? node.first : node.first + 1, a_first ? (*a)[0] : (*b)[0]};
          const Entry far{a_first ? node.first + 1 : node.first, a_first ? (*b)[0] : (*a)[0]};
          stack[sp++] = far;
          stack[sp++] = near;
        } else if (a) {
          stack[sp++] = {node.first, (*a)[0]};
        } else if (b) {
          stack[sp++] = {node.first + 1, (*b)[0]};
        }
      }
      return best;
    }

  private:
    struct Node {
      AABB          box;
      std::uint32_t first = 0; // leaf: first item; inner: left child (right = first+1)
      std::uint32_t count = 0;
    };

    void build(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end)
    {
      AABB box, centers;
      for (std::uint32_t i = begin; i < end; ++i) {
        box.extend(boxes_[items_[i]]);
        centers.extend(boxes_[items_[i]].center());
      }
      nodes_[node_index].box = box;
      const std::uint32_t n    = end - begin;
      const int           axis = centers.longest_axis();
      if (n <= kMaxLeafSize) {
        nodes_[node_index].first = begin;
        nodes_[node_index].count = n;
        return;
      }
      const std::uint32_t mid = begin + n / 2;
      std::nth_element(items_.begin() + begin, items_.begin() + mid, items_.begin() + end,
                       [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = boxes_[a].center()[axis], cb = boxes_[b].center()[axis];
                         return ca < cb || (ca == cb && a < b);
                       });
      const auto left = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back({});
      nodes_.push_back({});
      nodes_[node_index].first = left;
      build(left, begin, mid);
      build(left + 1, mid, end);
    }

    std::vector<AABB>          boxes_;
    std::vector<std::uint32_t> items_;
    std::vector<Node>          nodes_;
  };

  inline PartitionBvh build_partition_bvh(std::span<const Partition> partitions) { return PartitionBvh(partitions); }

  /// Next partition along the ray that is active under the current metadata. Inactive
  /// partitions and unoccupied gaps are skipped; nothing means the ray is done.
  inline std::optional<PartitionInterval> next_active_interval(const PartitionBvh &bvh,
                                                               std::span<const PartitionMeta> metas, const Ray &ray,
                                                               const TraversalConfig &config,
                                                               std::uint32_t last_visited = kNoPartition)
  {
    return bvh.closest(ray, config.epsilon, last_visited, [&](std::uint32_t id) { return metas[id].active; });
  }

  /// Moves t_min to just before the exit point so coplanar neighbors are still found.
  inline Ray advance_ray(Ray ray, const PartitionInterval &interval, const TraversalConfig &config)
  {
    ray.t_min = interval.t_exit - config.epsilon;
    return ray;
  }

  /// Calls visit(interval) for each active partition in front-to-back order until it
  /// returns false or the ray leaves the scene. Returns the number of intervals visited.
  template <typename Visit>
  std::size_t traverse(const PartitionBvh &bvh, std::span<const PartitionMeta> metas, Ray ray,
                       const TraversalConfig &config, Visit &&visit)
  {
    std::size_t   visited = 0;
    std::uint32_t last    = kNoPartition;
    while (auto iv = next_active_interval(bvh, metas, ray, config, last)) {
      ++visited;
      if (!visit(*iv)) break;
      last = iv->partition_id;
      ray  = advance_ray(ray, *iv, config);
    }
    return visited;
  }

} // namespace tetvol
