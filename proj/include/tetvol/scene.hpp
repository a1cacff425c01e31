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
#include "tetvol/sampler.hpp"
#include "tetvol/transfer.hpp"
#include "tetvol/traversal.hpp"

#include <optional>

namespace tetvol {

  struct SceneCounters {
    std::uint64_t bvh_builds      = 0; ///< partition BVH constructions
    std::uint64_t meta_recomputes = 0; ///< full metadata passes (one per TF change)
  };

  /// Everything a frame needs: the mesh and its point-location structure, the partitions
  /// with their BVH, and the transfer function with its per-partition metadata.
  /// Geometry is fixed after construction; only the TF and metas change.
  class Scene {
  public:
    Scene() = default;

    Scene(TetMesh mesh, const KdBuildConfig &kd, TransferFunction tf, std::optional<double> epsilon = std::nullopt,
          unsigned threads = 0)
        : mesh_(std::move(mesh)), tf_(std::move(tf))
    {
      sampler_    = MeshSampler(mesh_);
      partitions_ = build_partitions(mesh_, kd);
      ranges_.reserve(partitions_.size());
      for (const Partition &p : partitions_) ranges_.push_back(p.value_range);
      bvh_ = PartitionBvh(partitions_);
      ++counters_.bvh_builds;
      traversal_ = epsilon ? TraversalConfig{*epsilon} : TraversalConfig::for_bounds(mesh_.bounds);
      if (!(traversal_.epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
      recompute_metas(threads);
    }

    bool built() const { return sampler_.built() && !partitions_.empty(); }

    const TetMesh                    &mesh() const { return mesh_; }
    const MeshSampler                &sampler() const { return sampler_; }
    const std::vector<Partition>     &partitions() const { return partitions_; }
    const std::vector<ValueRange>    &value_ranges() const { return ranges_; }
    const PartitionBvh               &bvh() const { return bvh_; }
    const TransferFunction           &transfer_function() const { return tf_; }
    const std::vector<PartitionMeta> &metas() const { return metas_; }
    const TraversalConfig            &traversal() const { return traversal_; }
    const SceneCounters              &counters() const { return counters_; }

    /// Swaps in a new TF and recomputes metadata from the stored value ranges. The
    /// partition geometry and BVH are untouched.
    void set_transfer_function(TransferFunction tf, unsigned threads = 0)
    {
      tf_ = std::move(tf);
      recompute_metas(threads);
    }

  private:
    void recompute_metas(unsigned threads)
    {
      metas_ = compute_metas(tf_, ranges_, threads);
      ++counters_.meta_recomputes;
    }

    TetMesh                    mesh_;
    MeshSampler                sampler_;
    std::vector<Partition>     partitions_;
    std::vector<ValueRange>    ranges_;
    PartitionBvh               bvh_;
    TransferFunction           tf_;
    std::vector<PartitionMeta> metas_;
    TraversalConfig            traversal_;
    SceneCounters              counters_;
  };

  inline const std::vector<PartitionMeta> &update_transfer_function(Scene &scene, TransferFunction tf,
                                                                    unsigned threads = 0)
  {
    scene.set_transfer_function(std::move(tf), threads);
    return scene.metas();
  }

} // namespace tetvol
